"""Transient integration of the coupled carrier system.

Backward Euler in time.  Each step freezes the time level and decouples
the equations: the potential is solved for the current quasi-Fermi
iterate (through the homogenized nonlinear Poisson problem), fields and
currents are reconstructed, the reaction loads are evaluated at the
iterate (frozen coefficients), and the two continuity equations are
solved as linear systems in the densities.  The quasi-Fermi levels are
read back through the inverse statistics and the sweep repeats until
their sup-norm increment drops below the step tolerance.

Plain sweeps stall on long devices: a long-wavelength shift of the two
quasi-Fermi levels in opposite directions is screened almost perfectly
by the potential solve, so the sweep map keeps eigenvalues of about
1 - O(1/L^2) however small the time step.  The loop therefore
preconditions its increments.  The screening feedback maps a
quasi-Fermi perturbation to (+w, -w) with (P + V F') w = V (F1' r1 -
F2' r2), and inverting that feedback exactly collapses, by the
Woodbury-style cancellation (I - (P + VF')^{-1} VF') = (P + VF')^{-1}P,
to a single solve with the already-factored Poisson matrix:
w = P^{-1} V (F1' r1 - F2' r2), after which the iterate moves by the
residual plus (+w, -w).  The few transport modes the preconditioner
leaves (they strengthen with the step size) are collapsed by Anderson
mixing over a short history of the corrected residuals.  If an
accelerated iterate breaks a solve, the loop falls back to the plain
sweep image and continues.  Once the increment test passes, one
corrector pass re-evaluates the reaction loads at the new state and
re-solves the density systems, so the accepted step is implicit in the
recombination terms as well.

A step that produces a nonpositive density or fails to converge raises
StepRejected; the driver halves the step and retries, growing it again
after acceptances.  Blow-up is reported, not fought: when the carrier
norm proxy rises monotonically past the configured threshold, or the
step size underflows, integration stops and the result carries a
BlowUpReport (the continuous problem only guarantees local existence,
so this is an answer, not a failure).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .device import DeviceSpec, Mesh, build_mesh
from .errors import DomainError, SolverError, StepRejected
from .nonlinear_poisson import (NonlinearPoissonProblem, equilibrium_state,
                                solve_operator_S)
from .operators import (FluxScheme, SparseOperator, apply_surface_load,
                        assemble_continuity, assemble_poisson,
                        cell_average_faces, continuity_face_flux,
                        face_gradient, poisson_data_load, solve_linear)
from .recombination import SurfaceSRH, bulk_production
from .statistics import StatisticsModel

__all__ = [
    "CarrierState", "TimeStepperConfig", "SimulationModels", "StepReport",
    "BlowUpReport", "SimulationResult", "CurrentField", "contact_data",
    "initial_state", "compute_currents", "gummel_step", "run",
    "balance_report", "detect_blowup", "terminal_currents",
]


@dataclass
class CarrierState:
    """Fields at one accepted time level."""
    t: float
    phi: np.ndarray
    Phi: np.ndarray
    u: np.ndarray

    def copy(self) -> "CarrierState":
        return CarrierState(self.t, self.phi.copy(), self.Phi.copy(),
                            self.u.copy())


@dataclass(frozen=True)
class TimeStepperConfig:
    dt_init: float
    t_end: float
    dt_min: float = 1e-12
    dt_max: float = np.inf
    growth: float = 1.2
    shrink: float = 0.5
    gummel_tol: float = 1e-10
    gummel_max_iter: int = 40
    poisson_tol: float = 1e-12
    blowup_threshold: float = 1e6
    blowup_window: int = 3

    def __post_init__(self):
        if self.dt_init <= 0.0 or self.t_end <= 0.0:
            raise DomainError("dt_init and t_end must be positive")
        if not 0.0 < self.dt_min <= self.dt_init:
            raise DomainError("need 0 < dt_min <= dt_init")
        if self.growth < 1.0 or not 0.0 < self.shrink < 1.0:
            raise DomainError("growth must be >= 1 and shrink in (0, 1)")
        if self.gummel_tol <= 0.0 or self.gummel_max_iter < 1:
            raise DomainError("bad decoupling loop parameters")
        if self.blowup_window < 2:
            raise DomainError("blowup_window must be at least 2")


@dataclass
class SimulationModels:
    """Statistics, flux scheme, bulk reactions, optional extra source.

    ``source(t, mesh) -> (2, n_cells)`` is an additive volumetric
    production, the hook manufactured-solution tests drive the stepper
    with; production for both carriers, applied as given.
    """
    stats: tuple[StatisticsModel, StatisticsModel]
    scheme: FluxScheme = field(default_factory=FluxScheme)
    bulk: tuple = ()
    source: Callable | None = None


@dataclass
class StepReport:
    t: float
    dt: float
    gummel_iterations: int
    balance_residual: float
    proxy: float


@dataclass
class BlowUpReport:
    reason: str
    threshold: float
    times: list
    proxies: list


@dataclass
class SimulationResult:
    states: list
    reports: list
    blowup: BlowUpReport | None
    steps_accepted: int
    steps_rejected: int

    @property
    def final(self) -> CarrierState:
        return self.states[-1]

    @property
    def completed(self) -> bool:
        return self.blowup is None


@dataclass
class CurrentField:
    """Reconstructed flux data for one potential/carrier iterate."""
    face_flux: np.ndarray     # (2, n_faces) mass flow, low-to-high positive
    cell_current: np.ndarray  # (2, n_cells, dim) current density vectors
    face_field: np.ndarray    # (n_faces,) axis-directed potential gradient
    cell_field: np.ndarray    # (n_cells, dim) cellwise potential gradient


def contact_data(device: DeviceSpec, t: float) -> list[tuple[float, float, float]]:
    """(phi_D, Phi1_D, Phi2_D) per contact at time t, bias included."""
    return [c.values(t) for c in device.contacts]


def initial_state(device: DeviceSpec, models: SimulationModels,
                  mesh: Mesh | None = None, t: float = 0.0) -> CarrierState:
    """Thermal equilibrium start; contacts must be unbiased at ``t``."""
    mesh_out, phi, (u1, u2) = equilibrium_state(device, models.stats, t=t,
                                                mesh=mesh)
    return CarrierState(t=t, phi=phi, Phi=np.zeros((2, mesh_out.n_cells)),
                        u=np.vstack([u1, u2]))


def compute_currents(device: DeviceSpec, mesh: Mesh, models: SimulationModels,
                     phi: np.ndarray, chi: np.ndarray,
                     contacts: list[tuple[float, float, float]],
                     ) -> CurrentField:
    """Face fluxes, cell current vectors, and potential gradients.

    The axis current density at a face is the mass flow over the face
    area with a sign flip (the flux convention counts mass moving from
    the low to the high cell as positive, while the current field of
    carrier k points along u_k mu_k grad Phi_k).
    """
    phi_d = np.array([c[0] for c in contacts])
    face_e = face_gradient(mesh, phi, phi_d)
    cell_e = cell_average_faces(mesh, face_e)
    n_f = mesh.n_faces
    face_flux = np.zeros((2, n_f))
    cell_current = np.zeros((2, mesh.n_cells, mesh.dimension))
    for k in (1, 2):
        values = [(c[0], c[k]) for c in contacts]
        flux = continuity_face_flux(device, mesh, models.stats[k - 1],
                                    models.scheme, k, phi, chi[k - 1], values)
        face_flux[k - 1] = flux
        cell_current[k - 1] = cell_average_faces(
            mesh, -flux / mesh.face_area)
    return CurrentField(face_flux=face_flux, cell_current=cell_current,
                        face_field=face_e, cell_field=cell_e)


def _face_density(mesh: Mesh, faces: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Density at faces: adjacent cell value, or the mean across interior ones."""
    lo = mesh.face_cells[faces, 0]
    hi = mesh.face_cells[faces, 1]
    vlo = np.where(lo >= 0, u[np.maximum(lo, 0)], 0.0)
    vhi = np.where(hi >= 0, u[np.maximum(hi, 0)], 0.0)
    both = (lo >= 0) & (hi >= 0)
    return np.where(both, 0.5 * (vlo + vhi), vlo + vhi)


def _surface_loads(device: DeviceSpec, mesh: Mesh, u1: np.ndarray,
                   u2: np.ndarray) -> np.ndarray:
    """Interfacial recombination deposited into cells (recombination < 0)."""
    out = np.zeros(mesh.n_cells)
    pairs = list(zip(device.surfaces, mesh.surface_faces)) \
        + list(zip(device.interfaces, mesh.interface_faces))
    for segment, faces in pairs:
        model = segment.model
        if model is None or not faces.size:
            continue
        if not isinstance(model, SurfaceSRH):
            raise DomainError(
                f"unsupported interfacial model {type(model).__name__}")
        rate = model.eval(_face_density(mesh, faces, u1),
                          _face_density(mesh, faces, u2))
        out += apply_surface_load(mesh, faces, -rate)
    return out


def _quasi_fermi_norm(mesh: Mesh, Phi: np.ndarray,
                      contacts: list[tuple[float, float, float]]) -> float:
    """Blow-up proxy: max over carriers of sup|grad Phi_k| + sup|Phi_k|."""
    worst = 0.0
    for k in (1, 2):
        levels = np.array([c[k] for c in contacts])
        g = face_gradient(mesh, Phi[k - 1], levels)
        worst = max(worst, float(np.max(np.abs(g))
                                 + np.max(np.abs(Phi[k - 1]))))
    return worst


_MIX_WINDOW = 5  # residual-history depth of the decoupling loop


def gummel_step(device: DeviceSpec, mesh: Mesh, poisson: SparseOperator,
                models: SimulationModels, state: CarrierState, dt: float,
                config: TimeStepperConfig) -> tuple[CarrierState, StepReport]:
    """One backward-Euler step by decoupled, screening-corrected sweeps.

    Raises StepRejected when a density solve turns nonpositive, a
    potential solve fails, or the sweep budget runs out.  On success the
    returned report carries the defect of the discrete balance identity,
    evaluated with the exact loads the final linear solves used.
    """
    s1, s2 = models.stats
    t_next = state.t + dt
    contacts = contact_data(device, t_next)
    load = poisson_data_load(device, mesh, poisson, t_next)
    phi_d = poisson.factor().solve(load)
    V = mesh.cell_volumes

    phi = state.phi
    phi_tilde = phi - phi_d
    source = models.source(t_next, mesh) if models.source is not None else None
    if source is not None:
        source = np.asarray(source, dtype=float)
    zero_load = np.zeros(mesh.n_cells)

    def advance(Phi, refresh_potential=True):
        """One sweep image of the quasi-Fermi iterate.

        Solves the potential for the iterate (unless the corrector pass
        asks to keep it), evaluates the reaction loads there, solves the
        two density systems, and reads the quasi-Fermi levels back.
        """
        nonlocal phi, phi_tilde
        if refresh_potential:
            omega = np.vstack([Phi[0] - phi_d, Phi[1] + phi_d])
            problem = NonlinearPoissonProblem(
                poisson=poisson, volumes=V, load=zero_load,
                stats=models.stats, omega=omega)
            try:
                phi_tilde = solve_operator_S(problem, tol=config.poisson_tol,
                                             x0=phi_tilde)
            except SolverError as exc:
                raise StepRejected(f"potential solve failed: {exc}") from exc
            phi = phi_d + phi_tilde

        chi = np.vstack([Phi[0] - phi, Phi[1] + phi])
        currents = compute_currents(device, mesh, models, phi, chi, contacts)
        u1_eval = s1.eval(chi[0])
        u2_eval = s2.eval(chi[1])
        r_bulk = bulk_production(models.bulk, u1_eval, u2_eval, Phi[0], Phi[1],
                                 currents.cell_field, currents.cell_current[0],
                                 currents.cell_current[1])
        shared = V * r_bulk + _surface_loads(device, mesh, u1_eval, u2_eval)

        u_new = np.empty_like(state.u)
        Phi_new = np.empty_like(Phi)
        balance = 0.0
        for k in (1, 2):
            stats_k = models.stats[k - 1]
            values = [(c[0], c[k]) for c in contacts]
            M, dirichlet_load = assemble_continuity(
                device, mesh, stats_k, models.scheme, k, phi, chi[k - 1],
                values)
            rhs = V * state.u[k - 1] / dt + shared + dirichlet_load
            if source is not None:
                rhs = rhs + V * source[k - 1]
            system = SparseOperator(
                matrix=(M.matrix + sp.diags(V / dt, format="csr")).tocsr(),
                closure=M.closure)
            try:
                u_k = solve_linear(system, rhs)
            except SolverError as exc:
                raise StepRejected(f"continuity solve failed: {exc}") from exc
            if np.any(u_k <= 0.0) or not np.all(np.isfinite(u_k)):
                raise StepRejected(
                    f"nonpositive density for carrier {k} at t={t_next:.6g}")
            defect = system.matrix @ u_k - rhs
            scale = max(float(np.max(np.abs(rhs))), np.finfo(float).tiny)
            balance = max(balance, float(np.max(np.abs(defect))) / scale)
            u_new[k - 1] = u_k
            sign = -1.0 if k == 1 else 1.0
            Phi_new[k - 1] = stats_k.invert(u_k) - sign * phi
        screen = np.vstack([V * s1.eval_derivative(chi[0]),
                            V * s2.eval_derivative(chi[1])])
        return Phi_new, u_new, balance, screen

    Phi = state.Phi.copy()
    plain_image = None
    iterates: list[np.ndarray] = []
    directions: list[np.ndarray] = []
    prev_increment = np.inf
    for sweep in range(config.gummel_max_iter):
        try:
            Phi_new, u_new, balance, screen = advance(Phi)
        except StepRejected:
            if plain_image is None:
                raise
            # the accelerated iterate broke a solve; resume the plain
            # iteration from the last sweep image, which the map itself
            # produced
            Phi = plain_image
            plain_image = None
            iterates.clear()
            directions.clear()
            prev_increment = np.inf
            Phi_new, u_new, balance, screen = advance(Phi)
        residual = Phi_new - Phi
        increment = float(np.max(np.abs(residual)))
        if increment <= config.gummel_tol:
            Phi_fin, u_fin, balance, _ = advance(Phi_new,
                                                 refresh_potential=False)
            new_state = CarrierState(t=t_next, phi=phi, Phi=Phi_fin, u=u_fin)
            proxy = _quasi_fermi_norm(mesh, Phi_fin, contacts)
            return new_state, StepReport(t=t_next, dt=dt,
                                         gummel_iterations=sweep + 1,
                                         balance_residual=balance,
                                         proxy=proxy)
        plain_image = Phi_new
        w = poisson.factor().solve(screen[0] * residual[0]
                                   - screen[1] * residual[1])
        direction = np.concatenate([residual[0] + w, residual[1] - w])
        x = Phi.ravel()
        if increment > prev_increment and iterates:
            iterates.clear()
            directions.clear()
        prev_increment = increment
        iterates.append(x.copy())
        directions.append(direction)
        if len(iterates) > _MIX_WINDOW + 1:
            iterates.pop(0)
            directions.pop(0)
        if len(iterates) >= 2:
            dX = np.diff(np.stack(iterates, axis=1), axis=1)
            dD = np.diff(np.stack(directions, axis=1), axis=1)
            gamma, *_ = np.linalg.lstsq(dD, direction, rcond=None)
            mixed = x + direction - (dX + dD) @ gamma
        else:
            mixed = x + direction
        Phi = mixed.reshape(Phi.shape) if np.all(np.isfinite(mixed)) \
            else Phi_new
    raise StepRejected(
        f"decoupling loop did not converge in {config.gummel_max_iter} sweeps "
        f"(last increment {increment:.3e})")


def terminal_currents(device: DeviceSpec, mesh: Mesh,
                      models: SimulationModels,
                      state: CarrierState) -> dict[str, float]:
    """Net electric current leaving each contact.

    Counts carrier-1 mass outflow minus carrier-2 outflow (the carriers
    enter the space charge with opposite signs), summed over the
    contact's faces.  In steady state this total is the same at every
    contact up to sign, recombination notwithstanding.
    """
    contacts = contact_data(device, state.t)
    chi = np.vstack([state.Phi[0] - state.phi, state.Phi[1] + state.phi])
    currents = compute_currents(device, mesh, models, state.phi, chi,
                                contacts)
    out = {}
    for idx, contact in enumerate(device.contacts):
        faces = mesh.dirichlet_faces[idx]
        outward = np.where(mesh.face_cells[faces, 1] < 0, 1.0, -1.0)
        flow1 = float(np.sum(outward * currents.face_flux[0, faces]))
        flow2 = float(np.sum(outward * currents.face_flux[1, faces]))
        out[contact.side] = flow1 - flow2
    return out


def detect_blowup(proxies, threshold: float, window: int = 3) -> bool:
    """True when the trailing ``window`` proxies rise strictly past the threshold."""
    if len(proxies) < window:
        return False
    tail = list(proxies[-window:])
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    return increasing and tail[-1] > threshold


def run(device: DeviceSpec, models: SimulationModels,
        config: TimeStepperConfig, observer: Callable | None = None,
        initial: CarrierState | None = None) -> SimulationResult:
    """Integrate from equilibrium (or ``initial``) to t_end with adaptive steps."""
    mesh = build_mesh(device)
    poisson = assemble_poisson(device, mesh)
    state = initial_state(device, models, mesh) if initial is None \
        else initial.copy()
    states = [state]
    reports: list[StepReport] = []
    proxies: list[float] = []
    times: list[float] = []
    accepted = rejected = 0
    blowup = None
    dt = config.dt_init
    horizon = config.t_end * (1.0 - 1e-14)
    while state.t < horizon:
        dt_step = min(dt, config.t_end - state.t)
        try:
            state, report = gummel_step(device, mesh, poisson, models, state,
                                        dt_step, config)
        except StepRejected as exc:
            rejected += 1
            dt = dt_step * config.shrink
            if dt < config.dt_min:
                blowup = BlowUpReport(
                    reason=f"step size underflow: {exc}",
                    threshold=config.blowup_threshold,
                    times=list(times), proxies=list(proxies))
                break
            continue
        accepted += 1
        states.append(state)
        reports.append(report)
        proxies.append(report.proxy)
        times.append(report.t)
        if observer is not None:
            observer(state, report)
        if detect_blowup(proxies, config.blowup_threshold,
                         config.blowup_window):
            blowup = BlowUpReport(
                reason="carrier norm proxy increasing past threshold",
                threshold=config.blowup_threshold,
                times=list(times), proxies=list(proxies))
            break
        dt = min(dt_step * config.growth, config.dt_max)
    return SimulationResult(states=states, reports=reports, blowup=blowup,
                            steps_accepted=accepted, steps_rejected=rejected)


def balance_report(result: SimulationResult) -> np.ndarray:
    """Per-step defect of the discrete balance identity, relative scale."""
    return np.array([r.balance_residual for r in result.reports])
