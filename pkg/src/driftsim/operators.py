"""Finite-volume operator assembly on tensor-product meshes.

Two-point flux approximation with distance-weighted harmonic averaging of
the diagonal coefficient tensors across faces.  Dirichlet boundaries are
eliminated against ghost values at face centers (half-cell distance),
Robin segments add ``eps_gamma * area`` masses to the diagonal, plain
Neumann faces contribute nothing.  The electron/hole continuity operators
use Scharfetter-Gummel exponential fitting, optionally corrected for
degenerate statistics by a facewise degeneracy average (see ``sg_flux``).

Sign conventions: the Poisson/elliptic operators act so that
``(P phi)_i`` approximates the cellwise integral of ``-div(eps grad phi)``
plus boundary closure terms; the continuity matrix ``M`` maps densities
to net cell *outflow* of the mass flux, i.e. the discretization of
``-div j`` integrated over cells (production terms belong on the
right-hand side).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .device import (DeviceSpec, Mesh, TAG_DIRICHLET, TAG_ROBIN,
                     bulk_doping, cell_tensor, sample_series)
from .errors import DomainError, SolverError
from .statistics import StatisticsModel

__all__ = [
    "SparseOperator", "FluxScheme", "bernoulli", "sg_flux", "eta_face",
    "assemble_poisson", "assemble_elliptic", "poisson_data_load",
    "harmonic_lift", "assemble_continuity", "continuity_face_flux",
    "apply_surface_load", "face_gradient", "cell_average_faces",
    "solve_linear", "dump_matrix",
]


def bernoulli(x):
    """Bernoulli function B(x) = x / (e^x - 1), with B(0) = 1.

    Series for |x| < 1e-4 (the expm1 quotient loses digits there), the
    direct expm1 form elsewhere; for x beyond the exp overflow point the
    quotient correctly underflows to 0.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    with np.errstate(over="ignore"):
        out = np.where(small,
                       1.0 - x / 2.0 + x * x / 12.0 - x ** 4 / 720.0,
                       xs / np.expm1(xs))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FluxScheme:
    """Discrete flux variant for the continuity equations.

    ``central`` is the naive centered discretization (kept for
    comparison), ``scharfetter_gummel`` the exponentially fitted scheme,
    and ``scharfetter_gummel_enhanced`` its degeneracy-corrected form,
    which needs the statistics to average eta across each face.
    """
    variants = ("central", "scharfetter_gummel",
                "scharfetter_gummel_enhanced")
    variant: Literal["central", "scharfetter_gummel",
                     "scharfetter_gummel_enhanced"] = "scharfetter_gummel"

    def __post_init__(self):
        if self.variant not in self.variants:
            raise DomainError(f"unknown flux scheme {self.variant!r}")


def eta_face(stats: StatisticsModel, s_lo, s_hi):
    """Face average of the degeneracy factor eta = F/F'.

    Uses the divided difference (s_hi - s_lo)/(ln F(s_hi) - ln F(s_lo)),
    the harmonic path average of eta along the edge; this is the unique
    face constant for which equal quasi-Fermi levels produce exactly zero
    flux.  Falls back to the midpoint value when the arguments coincide.
    """
    if stats.kind == "boltzmann":
        return np.ones_like(np.asarray(s_lo, dtype=float))
    s_lo = np.asarray(s_lo, dtype=float)
    s_hi = np.asarray(s_hi, dtype=float)
    ds = s_hi - s_lo
    close = np.abs(ds) < 1e-6
    mid = stats.eval_eta(0.5 * (s_lo + s_hi))
    dlog = np.log(stats.eval(s_hi)) - np.log(stats.eval(s_lo))
    dlog = np.where(close, 1.0, dlog)
    return np.where(close, mid, ds / dlog)


def _sg_coefficients(scheme: FluxScheme, stats, s_lo, s_hi, dphi, t):
    """Per-face coefficients (a, b) with flux = a*u_lo - b*u_hi."""
    if scheme.variant == "central":
        return t * (1.0 + 0.5 * dphi), t * (1.0 - 0.5 * dphi)
    if scheme.variant == "scharfetter_gummel":
        return t * bernoulli(-dphi), t * bernoulli(dphi)
    eta = eta_face(stats, s_lo, s_hi)
    d = dphi / eta
    return t * eta * bernoulli(-d), t * eta * bernoulli(d)


def sg_flux(scheme: FluxScheme, u_lo, u_hi, s_lo, s_hi, dphi,
            mobility, area, distance, stats: StatisticsModel | None = None):
    """Mass flow through one face, positive from the low to the high side.

    ``dphi`` is the carrier-signed electrostatic drop across the face,
    i.e. (-1)^k (phi_hi - phi_lo); ``s_lo``/``s_hi`` are the statistics
    arguments (chi) on both sides, used only by the enhanced variant;
    ``mobility`` is the edge value, already averaged.  Densities must be
    positive.
    """
    u_lo = np.asarray(u_lo, dtype=float)
    u_hi = np.asarray(u_hi, dtype=float)
    if np.any(u_lo <= 0.0) or np.any(u_hi <= 0.0):
        raise DomainError("sg_flux requires positive densities")
    if scheme.variant == "scharfetter_gummel_enhanced" and stats is None:
        raise DomainError("enhanced flux needs the statistics model")
    t = np.asarray(mobility, dtype=float) * np.asarray(area, dtype=float) \
        / np.asarray(distance, dtype=float)
    a, b = _sg_coefficients(scheme, stats, np.asarray(s_lo, dtype=float),
                            np.asarray(s_hi, dtype=float),
                            np.asarray(dphi, dtype=float), t)
    out = a * u_lo - b * u_hi
    if out.ndim == 0:
        return float(out)
    return out


@dataclass
class BoundaryClosure:
    """Record of the eliminations applied while assembling an operator."""
    dirichlet_face: np.ndarray = field(default_factory=lambda: np.empty(0, int))
    dirichlet_cell: np.ndarray = field(default_factory=lambda: np.empty(0, int))
    dirichlet_coeff: np.ndarray = field(default_factory=lambda: np.empty(0))
    dirichlet_contact: np.ndarray = field(default_factory=lambda: np.empty(0, int))
    robin_face: np.ndarray = field(default_factory=lambda: np.empty(0, int))
    robin_cell: np.ndarray = field(default_factory=lambda: np.empty(0, int))
    robin_coeff: np.ndarray = field(default_factory=lambda: np.empty(0))
    robin_segment: np.ndarray = field(default_factory=lambda: np.empty(0, int))


@dataclass
class SparseOperator:
    """A CSR matrix over cell unknowns plus its boundary closure record."""
    matrix: sp.csr_matrix
    closure: BoundaryClosure

    _lu: object = field(default=None, repr=False, compare=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def factor(self):
        if self._lu is None:
            self._lu = spla.splu(self.matrix.tocsc())
        return self._lu

    def solve(self, b: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
        return solve_linear(self, b, rtol=rtol)

    def asymmetry(self) -> float:
        d = self.matrix - self.matrix.T
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0


def _face_transmissibility(mesh: Mesh, coeff: np.ndarray, faces: np.ndarray):
    """Distance-weighted harmonic transmissibility for interior faces."""
    lo = mesh.face_cells[faces, 0]
    hi = mesh.face_cells[faces, 1]
    ax = mesh.face_axis[faces]
    k_lo = coeff[lo, ax]
    k_hi = coeff[hi, ax]
    dl = mesh.face_dl[faces]
    dr = mesh.face_dr[faces]
    with np.errstate(divide="ignore"):
        t = mesh.face_area[faces] / (dl / k_lo + dr / k_hi)
    return lo, hi, t


def _boundary_transmissibility(mesh: Mesh, coeff: np.ndarray, faces: np.ndarray):
    lo = mesh.face_cells[faces, 0]
    hi = mesh.face_cells[faces, 1]
    cell = np.where(lo >= 0, lo, hi)
    dist = np.where(lo >= 0, mesh.face_dl[faces], mesh.face_dr[faces])
    k = coeff[cell, mesh.face_axis[faces]]
    return cell, mesh.face_area[faces] * k / dist


def _diffusion_matrix(mesh: Mesh, coeff: np.ndarray,
                      dirichlet_faces: np.ndarray) -> tuple[list, BoundaryClosure]:
    """COO triplets of the symmetric diffusion part plus Dirichlet closure."""
    rows, cols, data = [], [], []
    interior = np.flatnonzero(mesh.interior_mask())
    lo, hi, t = _face_transmissibility(mesh, coeff, interior)
    rows += [lo, hi, lo, hi]
    cols += [lo, hi, hi, lo]
    data += [t, t, -t, -t]

    cell, tb = _boundary_transmissibility(mesh, coeff, dirichlet_faces)
    rows.append(cell)
    cols.append(cell)
    data.append(tb)
    closure = BoundaryClosure(
        dirichlet_face=dirichlet_faces.copy(),
        dirichlet_cell=cell,
        dirichlet_coeff=tb,
        dirichlet_contact=mesh.face_contact[dirichlet_faces].copy(),
    )
    triplets = [np.concatenate(rows) if rows else np.empty(0, int),
                np.concatenate(cols) if cols else np.empty(0, int),
                np.concatenate(data) if data else np.empty(0)]
    return triplets, closure


def assemble_poisson(device: DeviceSpec, mesh: Mesh) -> SparseOperator:
    """Robin-Poisson operator: diffusion in eps + Robin masses + Dirichlet closure."""
    eps = cell_tensor(device, mesh, "eps")
    dirichlet = np.flatnonzero(mesh.face_tag == TAG_DIRICHLET)
    (rows, cols, data), closure = _diffusion_matrix(mesh, eps, dirichlet)

    robin_faces = np.flatnonzero(mesh.face_tag == TAG_ROBIN)
    if robin_faces.size:
        seg_of = np.full(mesh.n_faces, -1, dtype=int)
        for s, faces in enumerate(mesh.robin_faces):
            seg_of[faces] = s
        cell = np.where(mesh.face_cells[robin_faces, 0] >= 0,
                        mesh.face_cells[robin_faces, 0],
                        mesh.face_cells[robin_faces, 1])
        segs = seg_of[robin_faces]
        caps = np.array([device.robin[s].eps_gamma for s in segs])
        rows = np.concatenate([rows, cell])
        cols = np.concatenate([cols, cell])
        data = np.concatenate([data, caps * mesh.face_area[robin_faces]])
        closure.robin_face = robin_faces
        closure.robin_cell = cell
        closure.robin_coeff = caps * mesh.face_area[robin_faces]
        closure.robin_segment = segs

    n = mesh.n_cells
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return SparseOperator(matrix=matrix, closure=closure)


def assemble_elliptic(device: DeviceSpec, mesh: Mesh,
                      coeff: np.ndarray) -> SparseOperator:
    """Elliptic operator A_rho for a cellwise diagonal tensor ``coeff``.

    Same stencil as the Poisson assembly but without Robin masses, and
    with homogeneous Dirichlet closure on the contact set (the closure
    record still carries the elimination coefficients so callers can
    build lifts of inhomogeneous contact data).
    """
    coeff = np.asarray(coeff, dtype=float)
    if coeff.shape != (mesh.n_cells, mesh.dimension):
        raise DomainError("coefficient field must have shape (n_cells, dim)")
    if np.any(~np.isfinite(coeff)) or np.any(coeff <= 0.0):
        raise DomainError("elliptic coefficient must be positive and finite")
    dirichlet = np.flatnonzero(mesh.face_tag == TAG_DIRICHLET)
    (rows, cols, data), closure = _diffusion_matrix(mesh, coeff, dirichlet)
    n = mesh.n_cells
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return SparseOperator(matrix=matrix, closure=closure)


def poisson_data_load(device: DeviceSpec, mesh: Mesh, op: SparseOperator,
                      t: float) -> np.ndarray:
    """Right-hand side carrying doping, Dirichlet lifts, and Robin loads at time t."""
    load = mesh.cell_volumes * bulk_doping(device, mesh)
    for sheet, faces in zip(device.doping.sheets, mesh.sheet_faces):
        load += apply_surface_load(mesh, faces, sheet.density)
    cl = op.closure
    if cl.dirichlet_cell.size:
        phi_d = np.array([device.contacts[c].values(t)[0]
                          for c in cl.dirichlet_contact])
        np.add.at(load, cl.dirichlet_cell, cl.dirichlet_coeff * phi_d)
    if cl.robin_cell.size:
        phi_g = np.array([sample_series(device.robin[s].phi_gamma, t)
                          for s in cl.robin_segment])
        np.add.at(load, cl.robin_cell, cl.robin_coeff * phi_g)
    return load


def harmonic_lift(op: SparseOperator, contact_values: np.ndarray) -> np.ndarray:
    """Discrete harmonic extension of per-contact Dirichlet data through ``op``."""
    cl = op.closure
    if not cl.dirichlet_cell.size:
        return np.zeros(op.dimension)
    values = np.asarray(contact_values, dtype=float)[cl.dirichlet_contact]
    rhs = np.zeros(op.dimension)
    np.add.at(rhs, cl.dirichlet_cell, cl.dirichlet_coeff * values)
    return op.solve(rhs)


def assemble_continuity(device: DeviceSpec, mesh: Mesh, stats: StatisticsModel,
                        scheme: FluxScheme, k: int, phi: np.ndarray,
                        chi: np.ndarray, contact_values: list[tuple[float, float]],
                        ) -> tuple[SparseOperator, np.ndarray]:
    """Steady continuity operator M (net outflow of carrier k) and its load.

    ``contact_values`` holds one (phi_D, Phi_D) pair per contact, already
    sampled at the step time; the Dirichlet ghost densities are
    F(Phi_D + (-1)^k phi_D).  The returned load carries only the
    Dirichlet contributions; production terms are the caller's business.
    """
    if k not in (1, 2):
        raise DomainError(f"carrier index must be 1 or 2, got {k}")
    sign = -1.0 if k == 1 else 1.0
    mob = cell_tensor(device, mesh, "mu1" if k == 1 else "mu2")

    n = mesh.n_cells
    rows, cols, data = [], [], []
    load = np.zeros(n)

    interior = np.flatnonzero(mesh.interior_mask())
    lo, hi, t = _face_transmissibility(mesh, mob, interior)
    dphi = sign * (phi[hi] - phi[lo])
    a, b = _sg_coefficients(scheme, stats, chi[lo], chi[hi], dphi, t)
    rows += [lo, lo, hi, hi]
    cols += [lo, hi, hi, lo]
    data += [a, -b, b, -a]

    dirichlet = np.flatnonzero(mesh.face_tag == TAG_DIRICHLET)
    if dirichlet.size:
        cell, tb = _boundary_transmissibility(mesh, mob, dirichlet)
        contact = mesh.face_contact[dirichlet]
        phi_d = np.array([contact_values[c][0] for c in contact])
        Phi_d = np.array([contact_values[c][1] for c in contact])
        chi_d = Phi_d + sign * phi_d
        u_d = stats.eval(chi_d)
        on_lo_side = mesh.face_cells[dirichlet, 0] >= 0
        # ghost sits on the high side of the face when the cell is the low
        # side, and vice versa; dphi is always high minus low
        dphi_b = np.where(on_lo_side, sign * (phi_d - phi[cell]),
                          sign * (phi[cell] - phi_d))
        s_lo = np.where(on_lo_side, chi[cell], chi_d)
        s_hi = np.where(on_lo_side, chi_d, chi[cell])
        a, b = _sg_coefficients(scheme, stats, s_lo, s_hi, dphi_b, tb)
        diag = np.where(on_lo_side, a, b)
        off = np.where(on_lo_side, b, a)
        rows.append(cell)
        cols.append(cell)
        data.append(diag)
        np.add.at(load, cell, off * u_d)

    matrix = sp.coo_matrix((np.concatenate(data),
                            (np.concatenate(rows), np.concatenate(cols))),
                           shape=(n, n)).tocsr()
    closure = BoundaryClosure()
    if dirichlet.size:
        closure = BoundaryClosure(
            dirichlet_face=dirichlet, dirichlet_cell=cell,
            dirichlet_coeff=tb, dirichlet_contact=mesh.face_contact[dirichlet])
    return SparseOperator(matrix=matrix, closure=closure), load


def continuity_face_flux(device: DeviceSpec, mesh: Mesh,
                         stats: StatisticsModel, scheme: FluxScheme, k: int,
                         phi: np.ndarray, chi: np.ndarray,
                         contact_values: list[tuple[float, float]],
                         ) -> np.ndarray:
    """Facewise mass flow of carrier k, positive from the low to high side.

    Matches the coefficients of ``assemble_continuity`` exactly, so the
    divergence of this field reproduces M u minus the Dirichlet load.
    Faces without a flux stencil (insulated, Robin, surface) report zero;
    their physical flux lives in the boundary loads.
    """
    sign = -1.0 if k == 1 else 1.0
    mob = cell_tensor(device, mesh, "mu1" if k == 1 else "mu2")
    u = stats.eval(chi)
    out = np.zeros(mesh.n_faces)

    interior = np.flatnonzero(mesh.interior_mask())
    lo, hi, t = _face_transmissibility(mesh, mob, interior)
    dphi = sign * (phi[hi] - phi[lo])
    a, b = _sg_coefficients(scheme, stats, chi[lo], chi[hi], dphi, t)
    out[interior] = a * u[lo] - b * u[hi]

    dirichlet = np.flatnonzero(mesh.face_tag == TAG_DIRICHLET)
    if dirichlet.size:
        cell, tb = _boundary_transmissibility(mesh, mob, dirichlet)
        contact = mesh.face_contact[dirichlet]
        phi_d = np.array([contact_values[c][0] for c in contact])
        Phi_d = np.array([contact_values[c][1] for c in contact])
        chi_d = Phi_d + sign * phi_d
        u_d = stats.eval(chi_d)
        on_lo_side = mesh.face_cells[dirichlet, 0] >= 0
        dphi_b = np.where(on_lo_side, sign * (phi_d - phi[cell]),
                          sign * (phi[cell] - phi_d))
        s_lo = np.where(on_lo_side, chi[cell], chi_d)
        s_hi = np.where(on_lo_side, chi_d, chi[cell])
        u_lo = np.where(on_lo_side, u[cell], u_d)
        u_hi = np.where(on_lo_side, u_d, u[cell])
        a, b = _sg_coefficients(scheme, stats, s_lo, s_hi, dphi_b, tb)
        out[dirichlet] = a * u_lo - b * u_hi
    return out


def apply_surface_load(mesh: Mesh, faces: np.ndarray, rate) -> np.ndarray:
    """Distribute a per-area face rate into adjacent cells.

    Boundary faces deposit ``rate * area`` into their single cell,
    interior faces half to each neighbor; the total injected mass equals
    sum(rate * area) exactly (same additions, reassociated).
    """
    faces = np.asarray(faces, dtype=int)
    rate = np.broadcast_to(np.asarray(rate, dtype=float), faces.shape)
    out = np.zeros(mesh.n_cells)
    total = rate * mesh.face_area[faces]
    lo = mesh.face_cells[faces, 0]
    hi = mesh.face_cells[faces, 1]
    both = (lo >= 0) & (hi >= 0)
    np.add.at(out, lo[both], 0.5 * total[both])
    np.add.at(out, hi[both], 0.5 * total[both])
    only = ~both
    np.add.at(out, np.where(lo[only] >= 0, lo[only], hi[only]), total[only])
    return out


def face_gradient(mesh: Mesh, values: np.ndarray,
                  contact_values: np.ndarray | None = None) -> np.ndarray:
    """Axis-directed first difference of a cell field at every face.

    Interior faces use the two-point difference over the center-to-center
    distance, Dirichlet faces the half-cell difference against the ghost
    value at the face center (``contact_values`` indexed by contact id).
    Other boundary faces report zero, which is the consistent value for
    insulated segments and a deliberate approximation for Robin ones.
    """
    g = np.zeros(mesh.n_faces)
    interior = np.flatnonzero(mesh.interior_mask())
    lo = mesh.face_cells[interior, 0]
    hi = mesh.face_cells[interior, 1]
    g[interior] = (values[hi] - values[lo]) / (mesh.face_dl[interior]
                                               + mesh.face_dr[interior])
    dirichlet = np.flatnonzero(mesh.face_tag == TAG_DIRICHLET)
    if dirichlet.size:
        if contact_values is None:
            raise DomainError("face_gradient needs contact values on "
                              "meshes with Dirichlet faces")
        ghost = np.asarray(contact_values, dtype=float)[
            mesh.face_contact[dirichlet]]
        c_lo = mesh.face_cells[dirichlet, 0]
        c_hi = mesh.face_cells[dirichlet, 1]
        on_lo_side = c_lo >= 0
        cell = np.where(on_lo_side, c_lo, c_hi)
        dist = np.where(on_lo_side, mesh.face_dl[dirichlet],
                        mesh.face_dr[dirichlet])
        g[dirichlet] = np.where(on_lo_side, ghost - values[cell],
                                values[cell] - ghost) / dist
    return g


def cell_average_faces(mesh: Mesh, face_values: np.ndarray) -> np.ndarray:
    """Average a per-face quantity to cells, one column per axis."""
    face_values = np.asarray(face_values, dtype=float)
    return 0.5 * (face_values[mesh.cell_face_lo]
                  + face_values[mesh.cell_face_hi])


def solve_linear(op, b: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Direct sparse solve with an explicit residual contract.

    Factorizes once (cached on the operator), applies one step of
    iterative refinement if the residual check fails, and raises
    SolverError when ||Ax-b|| > rtol * ||b|| persists.
    """
    if isinstance(op, SparseOperator):
        matrix, lu = op.matrix, op.factor()
    else:
        matrix = op.tocsr()
        lu = spla.splu(matrix.tocsc())
    b = np.asarray(b, dtype=float)
    x = lu.solve(b)
    scale = max(float(np.linalg.norm(b)), np.finfo(float).tiny)
    res = np.linalg.norm(matrix @ x - b)
    if res > rtol * scale:
        x = x + lu.solve(b - matrix @ x)
        res = np.linalg.norm(matrix @ x - b)
        if res > rtol * scale:
            raise SolverError(
                f"linear solve residual {res:.3e} exceeds {rtol:.1e} * ||b||",
                residual=float(res))
    return x


def dump_matrix(op: SparseOperator, path) -> None:
    """Write the operator in coordinate text format (row col value per line)."""
    coo = op.matrix.tocoo()
    with open(path, "w") as f:
        f.write(f"# {coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{i} {j} {v:.17e}\n")
