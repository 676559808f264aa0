"""Carrier statistics: distribution functions and their inverses.

Two statistics are available:

* ``boltzmann``        F(s) = exp(s)
* ``fermi_dirac_half`` F(s) = (2/sqrt(pi)) * integral_0^inf sqrt(t)/(1+exp(t-s)) dt

The Fermi-Dirac integral of order 1/2 is evaluated by adaptive
Gauss-Kronrod quadrature after the substitution t = x**2 (which removes
the root singularity and leaves an analytic integrand), with a crossover
to the Boltzmann asymptote exp(s) for s <= -15 and to the degenerate
Sommerfeld series for s >= 30.  The derivative F' is the corresponding
integral of order -1/2; the degeneracy factor eta = F/F' equals 1 for
Boltzmann statistics and is >= 1 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit

from .errors import DomainError, NonConvergenceError, QuadratureError

__all__ = [
    "StatisticsModel",
    "boltzmann",
    "fermi_dirac_half",
]

_BOLTZMANN_CROSSOVER = -15.0
_SOMMERFELD_CROSSOVER = 30.0
_TAIL_DECADES = 48.0  # upper cutoff x**2 - s for the substituted integrand

# Gauss-Kronrod 7-15 rule on [-1, 1].  Kronrod abscissae, Kronrod weights,
# and the weights of the embedded 7-point Gauss rule (odd-index nodes).
_KRONROD_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_KRONROD_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_GAUSS_SLICE = slice(1, None, 2)


def _density_integrand(x, s):
    # (4/sqrt(pi)) x^2 / (1 + exp(x^2 - s)), written through the logistic
    # function so large exponents neither overflow nor warn
    return (4.0 / np.sqrt(np.pi)) * x * x * expit(s - x * x)


def _derivative_integrand(x, s):
    return (2.0 / np.sqrt(np.pi)) * expit(s - x * x)


def _gauss_kronrod(integrand, s, rtol, max_depth):
    """Integrate ``integrand(x, s)`` over x in [0, sqrt(max(s,0)+48)].

    Vectorized over the sample array ``s``: the panel subdivision (in the
    normalized coordinate xi in [0, 1]) is shared by all samples and is
    refined where the worst sample still violates the tolerance.  Each
    panel's value is the sum of K15 over its two halves; the error
    estimate combines the parent-vs-children difference with the embedded
    Gauss-7 defect of each half, which stays reliable even when the Fermi
    edge hides between the nodes of a single rule.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    upper = np.sqrt(np.maximum(s, 0.0) + _TAIL_DECADES)
    tiny = np.finfo(float).tiny

    def rule(a, b):
        half = 0.5 * (b - a)
        xi = a + half * (1.0 + _KRONROD_NODES)            # (15,)
        x = upper[:, None] * xi[None, :]                  # (n_s, 15)
        g = integrand(x, s[:, None])
        scale = half * upper                              # (n_s,)
        fine = g @ _KRONROD_WEIGHTS * scale
        coarse = g[:, _GAUSS_SLICE] @ _GAUSS_WEIGHTS * scale
        return fine, np.abs(fine - coarse)

    def assess(a, b):
        mid = 0.5 * (a + b)
        parent, _ = rule(a, b)
        left, dl = rule(a, mid)
        right, dr = rule(mid, b)
        value = left + right
        err = np.abs(parent - value) + dl + dr
        return value, err

    panels = []
    for i in range(8):
        a, b = i / 8.0, (i + 1) / 8.0
        value, err = assess(a, b)
        panels.append([a, b, 0, value, err])

    while True:
        total = np.sum([p[3] for p in panels], axis=0)
        errsum = np.sum([p[4] for p in panels], axis=0)
        budget = rtol * np.maximum(np.abs(total), tiny)
        rel = np.max(errsum / np.maximum(np.abs(total), tiny))
        if rel <= rtol:
            return total
        share = 1.0 / (2.0 * len(panels))
        flagged = [p for p in panels
                   if np.max(p[4] / budget) > share]
        if not flagged:
            flagged = [max(panels, key=lambda p: np.max(p[4] / budget))]
        if any(p[2] >= max_depth for p in flagged):
            raise QuadratureError(achieved=float(rel), requested=rtol)
        for p in flagged:
            panels.remove(p)
            a, b, depth = p[0], p[1], p[2]
            mid = 0.5 * (a + b)
            for lo, hi in ((a, mid), (mid, b)):
                value, err = assess(lo, hi)
                panels.append([lo, hi, depth + 1, value, err])


def _sommerfeld_density(s):
    u = np.pi / s
    return (4.0 / (3.0 * np.sqrt(np.pi))) * s ** 1.5 * (
        1.0 + 0.125 * u * u + (7.0 / 640.0) * u ** 4)


def _sommerfeld_derivative(s):
    u = np.pi / s
    return (2.0 / np.sqrt(np.pi)) * np.sqrt(s) * (
        1.0 - (1.0 / 24.0) * u * u - (7.0 / 384.0) * u ** 4)


def _piecewise_fd(s, integrand, series, rtol, max_depth):
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    low = s <= _BOLTZMANN_CROSSOVER
    high = s >= _SOMMERFELD_CROSSOVER
    mid = ~(low | high)
    out[low] = np.exp(s[low])
    if np.any(high):
        out[high] = series(s[high])
    if np.any(mid):
        out[mid] = _gauss_kronrod(integrand, s[mid], rtol, max_depth)
    return out


@dataclass(frozen=True)
class StatisticsModel:
    """One carrier's distribution function and evaluation controls.

    ``quad_rtol`` and ``quad_max_depth`` drive the adaptive quadrature for
    the Fermi-Dirac variant; they are ignored for Boltzmann statistics.
    """

    kind: Literal["boltzmann", "fermi_dirac_half"]
    quad_rtol: float = 1e-10
    quad_max_depth: int = 14

    def __post_init__(self):
        if self.kind not in ("boltzmann", "fermi_dirac_half"):
            raise DomainError(f"unknown statistics kind {self.kind!r}")
        if not 0.0 < self.quad_rtol < 1.0:
            raise DomainError("quad_rtol must lie in (0, 1)")
        if self.quad_max_depth < 1:
            raise DomainError("quad_max_depth must be >= 1")

    # -- evaluation ------------------------------------------------------

    def eval(self, s):
        """Density F(s).  Accepts scalars or arrays; s must be finite."""
        s = np.asarray(s, dtype=float)
        _require_finite(s, "s")
        if self.kind == "boltzmann":
            # overflow to inf is the honest answer for huge arguments and
            # lets line searches reject the trial point without a warning
            with np.errstate(over="ignore"):
                out = np.exp(s)
        else:
            out = _piecewise_fd(s, _density_integrand, _sommerfeld_density,
                                self.quad_rtol, self.quad_max_depth)
        return _match_shape(out, s)

    def eval_derivative(self, s):
        """dF/ds, strictly positive.  Equals the order -1/2 integral for FD."""
        s = np.asarray(s, dtype=float)
        _require_finite(s, "s")
        if self.kind == "boltzmann":
            with np.errstate(over="ignore"):
                out = np.exp(s)
        else:
            out = _piecewise_fd(s, _derivative_integrand,
                                _sommerfeld_derivative,
                                self.quad_rtol, self.quad_max_depth)
        return _match_shape(out, s)

    def eval_eta(self, s):
        """Degeneracy factor eta(s) = F(s)/F'(s); identically 1 for Boltzmann."""
        s = np.asarray(s, dtype=float)
        _require_finite(s, "s")
        if self.kind == "boltzmann":
            return _match_shape(np.ones(s.shape), s)
        flat = np.atleast_1d(s).ravel()
        out = np.ones_like(flat)  # both asymptotes are exp(s) below the crossover
        rest = flat > _BOLTZMANN_CROSSOVER
        if np.any(rest):
            out[rest] = self.eval(flat[rest]) / self.eval_derivative(flat[rest])
        return _match_shape(out, s)

    def invert(self, u, rtol: float = 1e-12):
        """Solve F(s) = u for s.  Requires u > 0 elementwise.

        Bracketing is closed-form: F(s) < exp(s) makes log(u) a lower
        bound, and the degenerate leading term bounds from above; a
        safeguarded Newton iteration (bisection fallback) then converges to
        ``|F(s) - u| <= rtol * u``.
        """
        u = np.asarray(u, dtype=float)
        _require_finite(u, "u")
        if np.any(u <= 0.0):
            bad = np.argwhere(np.atleast_1d(u <= 0.0)).ravel()[0]
            raise DomainError(f"invert requires positive density, got "
                              f"{np.atleast_1d(u)[bad]!r} at index {bad}")
        if self.kind == "boltzmann":
            return _match_shape(np.log(u), u)
        return _match_shape(self._invert_fd(np.atleast_1d(u).ravel(), rtol), u)

    def _invert_fd(self, u, rtol):
        f0 = float(self.eval(0.0))
        # F(s) < exp(s) everywhere, so log(u) brackets from below; the
        # degenerate leading term (4/(3 sqrt(pi))) s^{3/2} < F(s) for s > 0
        # gives the upper bracket for u >= F(0)
        lo = np.log(u)
        hi = np.where(u >= f0,
                      (0.75 * np.sqrt(np.pi) * u) ** (2.0 / 3.0) + 1.0,
                      0.0)
        s = lo.copy()
        f = np.empty_like(u)
        for _ in range(80):
            f[:] = self.eval(s) - u
            if np.all(np.abs(f) <= rtol * u):
                return s
            lo = np.where(f < 0.0, s, lo)
            hi = np.where(f > 0.0, s, hi)
            trial = s - f / self.eval_derivative(s)
            inside = (trial > lo) & (trial < hi)
            s = np.where(inside, trial, 0.5 * (lo + hi))
        raise NonConvergenceError("Fermi-Dirac inversion stalled",
                                  iterations=80,
                                  residual=float(np.max(np.abs(f / u))))


def boltzmann() -> StatisticsModel:
    return StatisticsModel(kind="boltzmann")


def fermi_dirac_half(rtol: float = 1e-10, max_depth: int = 14) -> StatisticsModel:
    return StatisticsModel(kind="fermi_dirac_half", quad_rtol=rtol,
                           quad_max_depth=max_depth)


def _require_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be finite")


def _match_shape(out, template):
    if np.ndim(template) == 0:
        return float(np.asarray(out).reshape(-1)[0])
    return np.asarray(out, dtype=float).reshape(np.shape(template))
