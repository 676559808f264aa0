import numpy as np
import pytest

from driftsim.device import (
    BoxDoping,
    Contact,
    DeviceSpec,
    DopingProfile,
    MaterialRegion,
    RobinSegment,
    build_mesh,
)
from driftsim.errors import DomainError
from driftsim.operators import assemble_poisson
from driftsim.statistics import boltzmann
from driftsim.transient import (
    SimulationModels,
    TimeStepperConfig,
    balance_report,
    compute_currents,
    contact_data,
    detect_blowup,
    gummel_step,
    initial_state,
    run,
    terminal_currents,
)

BB = (boltzmann(), boltzmann())


def insulated_box(cells=8):
    return DeviceSpec(
        dimension=1, extent=(1.0,), resolution=(cells,),
        regions=(MaterialRegion("bulk", ((0.0, 1.0),)),),
        robin=(RobinSegment("left", eps_gamma=1.0),
               RobinSegment("right", eps_gamma=1.0)))


def biased_diode(bias=0.1, cells=32):
    phi_n = float(np.arcsinh(0.5))
    ramp = ((0.0, 0.0), (0.5, bias))
    return DeviceSpec(
        dimension=1, extent=(2.0,), resolution=(cells,),
        regions=(MaterialRegion("bulk", ((0.0, 2.0),)),),
        contacts=(Contact(side="left", phi=-phi_n),
                  Contact(side="right", phi=phi_n, bias=ramp)),
        doping=DopingProfile(bulk=(BoxDoping(((0.0, 1.0),), -1.0),
                                   BoxDoping(((1.0, 2.0),), 1.0))))


# -- stepper configuration ------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(dt_init=0.0, t_end=1.0),
    dict(dt_init=0.1, t_end=-1.0),
    dict(dt_init=0.1, t_end=1.0, dt_min=0.2),
    dict(dt_init=0.1, t_end=1.0, growth=0.9),
    dict(dt_init=0.1, t_end=1.0, shrink=1.0),
    dict(dt_init=0.1, t_end=1.0, gummel_tol=0.0),
    dict(dt_init=0.1, t_end=1.0, gummel_max_iter=0),
    dict(dt_init=0.1, t_end=1.0, blowup_window=1),
])
def test_stepper_config_validation(kwargs):
    with pytest.raises(DomainError):
        TimeStepperConfig(**kwargs)


def test_detect_blowup_needs_full_window():
    assert not detect_blowup([5.0, 6.0], threshold=1.0, window=3)


def test_detect_blowup_requires_strict_increase():
    assert detect_blowup([1.0, 2.0, 3.0], threshold=2.5, window=3)
    assert not detect_blowup([1.0, 3.0, 3.0], threshold=2.5, window=3)
    assert not detect_blowup([4.0, 3.0, 5.0], threshold=2.5, window=3)


def test_detect_blowup_threshold_applies_to_last():
    assert not detect_blowup([0.1, 0.2, 0.3], threshold=2.5, window=3)


# -- exact time integration -----------------------------------------------

def test_constant_source_integrates_exactly():
    # du/dt = 1 on an insulated neutral box: implicit Euler reproduces
    # u(t) = 1 + t to solver tolerance, and the potential stays flat
    dev = insulated_box()
    models = SimulationModels(
        stats=BB, source=lambda t, mesh: np.ones((2, mesh.n_cells)))
    cfg = TimeStepperConfig(dt_init=0.1, t_end=1.0, dt_max=0.1,
                            gummel_tol=1e-12)
    result = run(dev, models, cfg)
    assert result.completed
    final = result.final
    assert final.t == pytest.approx(1.0)
    assert np.max(np.abs(final.u - 2.0)) <= 1e-9
    assert np.max(np.abs(final.phi)) <= 1e-9


def test_equilibrium_is_stationary():
    dev = biased_diode(bias=0.0)
    models = SimulationModels(stats=BB)
    cfg = TimeStepperConfig(dt_init=0.1, t_end=0.5, dt_max=0.1)
    start = initial_state(dev, models)
    result = run(dev, models, cfg, initial=start)
    drift = np.max(np.abs(result.final.u - start.u))
    assert drift <= 1e-10


# -- bookkeeping ----------------------------------------------------------

def test_observer_sees_every_accepted_step():
    dev = insulated_box()
    models = SimulationModels(stats=BB)
    cfg = TimeStepperConfig(dt_init=0.25, t_end=1.0, dt_max=0.25)
    seen = []
    result = run(dev, models, cfg, observer=lambda s, r: seen.append(r.t))
    assert len(seen) == result.steps_accepted
    assert seen == [r.t for r in result.reports]
    assert seen == sorted(seen)


def test_balance_report_matches_steps():
    dev = biased_diode()
    models = SimulationModels(stats=BB)
    cfg = TimeStepperConfig(dt_init=0.05, t_end=0.3, dt_max=0.1)
    result = run(dev, models, cfg)
    residuals = balance_report(result)
    assert residuals.shape == (result.steps_accepted,)
    assert np.max(residuals) <= 1e-12


def test_dt_respects_cap_and_horizon():
    dev = insulated_box()
    models = SimulationModels(stats=BB)
    cfg = TimeStepperConfig(dt_init=0.05, t_end=0.4, dt_max=0.08)
    result = run(dev, models, cfg)
    dts = [r.dt for r in result.reports]
    assert max(dts) <= 0.08 + 1e-15
    assert result.final.t == pytest.approx(0.4)


def test_initial_state_rejects_bias_at_start():
    dev = biased_diode(bias=0.1)
    # the ramp starts at zero, so t = 0 is fine; t = 0.5 is not
    models = SimulationModels(stats=BB)
    initial_state(dev, models, t=0.0)
    with pytest.raises(DomainError):
        initial_state(dev, models, t=0.5)


def test_run_runs_its_own_equilibrium():
    dev = biased_diode(bias=0.05)
    models = SimulationModels(stats=BB)
    cfg = TimeStepperConfig(dt_init=0.05, t_end=0.2, dt_max=0.05)
    result = run(dev, models, cfg)
    assert result.completed
    assert result.states[0].t == 0.0
    assert len(result.states) == result.steps_accepted + 1


# -- currents -------------------------------------------------------------

def test_terminal_currents_vanish_at_equilibrium():
    dev = biased_diode(bias=0.0)
    mesh = build_mesh(dev)
    models = SimulationModels(stats=BB)
    state = initial_state(dev, models, mesh)
    currents = terminal_currents(dev, mesh, models, state)
    assert set(currents) == {"left", "right"}
    assert abs(currents["left"]) <= 1e-10
    assert abs(currents["right"]) <= 1e-10


def test_current_field_shapes():
    dev = biased_diode(cells=16)
    mesh = build_mesh(dev)
    models = SimulationModels(stats=BB)
    state = initial_state(dev, models, mesh)
    chi = np.vstack([state.Phi[0] - state.phi, state.Phi[1] + state.phi])
    field = compute_currents(dev, mesh, models, state.phi, chi,
                             contact_data(dev, state.t))
    assert field.face_flux.shape == (2, mesh.n_faces)
    assert field.cell_current.shape == (2, mesh.n_cells, 1)
    assert field.face_field.shape == (mesh.n_faces,)
    assert field.cell_field.shape == (mesh.n_cells, 1)


def test_gummel_step_advances_time():
    dev = biased_diode()
    mesh = build_mesh(dev)
    poisson = assemble_poisson(dev, mesh)
    models = SimulationModels(stats=BB)
    cfg = TimeStepperConfig(dt_init=0.05, t_end=1.0)
    state = initial_state(dev, models, mesh)
    new, report = gummel_step(dev, mesh, poisson, models, state, 0.05, cfg)
    assert new.t == pytest.approx(0.05)
    assert state.t == 0.0  # input state untouched
    assert report.gummel_iterations >= 1
    assert report.balance_residual <= 1e-12
