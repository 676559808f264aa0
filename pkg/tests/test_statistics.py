"""Distribution function checks against pre-computed reference values.

Reference values come from two independent sources, both frozen here so
the tests run without extra dependencies:

  - closed forms through the Dirichlet eta function,
    F(0) = (1 - 2**-0.5) * zeta(3/2) and F'(0) = (1 - 2**0.5) * zeta(1/2);
  - a 1e6-node trapezoid quadrature of the defining integral after the
    t = v**2 substitution (removes the root singularity).

Tolerance guide:
  - closed-form eta values:        abs 1e-13 (same arithmetic, tight)
  - trapezoid cross-check:         abs 1e-5 (oracle discretization)
  - Boltzmann tail (s <= -15):     rel 1e-4 (crossover contract)
  - inversion round trip:          rel 1e-10
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftsim.errors import DomainError
from driftsim.statistics import StatisticsModel, boltzmann, fermi_dirac_half

FD = fermi_dirac_half()
BOLTZ = boltzmann()

# (1 - 2**-0.5) * scipy.special.zeta(1.5)
F_AT_ZERO = 0.7651470246254077
# (1 - 2**0.5) * scipy.special.zeta(0.5)
FPRIME_AT_ZERO = 0.6048986434216305
# 1e6-node trapezoid oracle
F_QUAD = {0.0: 0.7651470246254081, 1.0: 1.5756407761513,
          5.0: 8.844208895242957, -5.0: 0.0067219543145059105}
# bisection on the same oracle
INVERT_ONE = 0.348747361103643


class TestFermiDiracValues:
    def test_at_zero_closed_form(self):
        assert FD.eval(0.0) == pytest.approx(F_AT_ZERO, abs=1e-13)

    def test_derivative_at_zero_closed_form(self):
        assert FD.eval_derivative(0.0) == pytest.approx(FPRIME_AT_ZERO, abs=1e-13)

    @pytest.mark.parametrize("s", sorted(F_QUAD))
    def test_against_quadrature_oracle(self, s):
        assert FD.eval(s) == pytest.approx(F_QUAD[s], abs=1e-5)

    def test_invert_of_one(self):
        assert FD.invert(1.0) == pytest.approx(INVERT_ONE, rel=1e-10)

    def test_boltzmann_tail(self):
        # below the crossover F(s) must track exp(s) to 1e-4 relative
        s = np.array([-12.0, -13.5, -15.0, -20.0, -30.0])
        rel = np.abs(FD.eval(s) / np.exp(s) - 1.0)
        assert np.max(rel) <= 1e-4

    def test_crossover_continuity(self):
        # the quadrature and the asymptote must agree where they hand over
        eps = 1e-9
        low = abs(FD.eval(-15.0 - eps) / FD.eval(-15.0 + eps) - 1.0)
        high = abs(FD.eval(30.0 - eps) / FD.eval(30.0 + eps) - 1.0)
        assert low <= 1e-5
        assert high <= 1e-5

    def test_degenerate_limit(self):
        # leading Sommerfeld term (4/(3 sqrt(pi))) s^{3/2}
        s = 200.0
        lead = 4.0 / (3.0 * np.sqrt(np.pi)) * s ** 1.5
        assert FD.eval(s) == pytest.approx(lead, rel=1e-3)


class TestMonotonicityAndEta:
    def test_strictly_increasing(self):
        s = np.linspace(-20.0, 40.0, 400)
        f = FD.eval(s)
        assert np.all(np.diff(f) > 0.0)

    def test_derivative_positive(self):
        s = np.linspace(-20.0, 40.0, 97)
        assert np.all(FD.eval_derivative(s) > 0.0)

    def test_eta_at_least_one(self):
        s = np.linspace(-18.0, 40.0, 150)
        assert np.all(FD.eval_eta(s) >= 1.0 - 1e-12)

    def test_eta_boltzmann_is_one(self):
        s = np.linspace(-5.0, 5.0, 11)
        assert np.all(BOLTZ.eval_eta(s) == 1.0)


@given(st.floats(min_value=-25.0, max_value=35.0))
@settings(max_examples=200, deadline=None, derandomize=True)
def test_invert_round_trip(s):
    u = FD.eval(s)
    assert FD.eval(FD.invert(u)) == pytest.approx(u, rel=1e-10)


@given(st.floats(min_value=1e-10, max_value=1e6))
@settings(max_examples=200, deadline=None, derandomize=True)
def test_invert_is_inverse_from_density_side(u):
    assert FD.eval(FD.invert(u)) == pytest.approx(u, rel=1e-10)


def test_boltzmann_is_exp_and_log():
    s = np.linspace(-30.0, 30.0, 61)
    assert np.allclose(BOLTZ.eval(s), np.exp(s), rtol=0.0, atol=0.0)
    assert np.allclose(BOLTZ.eval_derivative(s), np.exp(s), rtol=0.0)
    u = np.exp(s)
    assert np.allclose(BOLTZ.invert(u), s, rtol=1e-15, atol=1e-13)


def test_scalar_in_scalar_out():
    assert isinstance(FD.eval(0.3), float)
    assert isinstance(FD.invert(0.7), float)
    out = FD.eval(np.array([0.1, 0.2]))
    assert out.shape == (2,)


def test_shape_preserved_2d():
    s = np.linspace(-3.0, 3.0, 6).reshape(2, 3)
    assert FD.eval(s).shape == (2, 3)
    assert FD.invert(FD.eval(s)).shape == (2, 3)


class TestErrors:
    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            StatisticsModel(kind="maxwell")

    def test_nonfinite_argument(self):
        with pytest.raises(DomainError):
            FD.eval(np.array([0.0, np.nan]))

    def test_invert_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            FD.invert(0.0)
        with pytest.raises(DomainError):
            BOLTZ.invert(np.array([1.0, -2.0]))

    def test_bad_quadrature_controls(self):
        with pytest.raises(DomainError):
            fermi_dirac_half(rtol=0.0)
        with pytest.raises(DomainError):
            fermi_dirac_half(max_depth=0)
