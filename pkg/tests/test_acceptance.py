"""Acceptance gate: every shipped guarantee, one test per criterion.

Each test runs the corresponding property suite from ``driftsim.verify``
with seed 0, prints the measured-versus-bound line for every property, and
fails if any property failed.  The two runtime constraints (ionization
suite under five seconds, whole module under two minutes) are asserted
directly.

Run with ``pytest tests/test_acceptance.py -v`` to get one pass/fail line
per criterion.
"""

import time

import pytest

from driftsim import verify

_MODULE_T0 = time.perf_counter()


def run_and_assert(suite, seed=0):
    results = verify.run_suite(suite, seed=seed)
    for r in results:
        print(r.render())
    failed = [r for r in results if not r.passed]
    assert not failed, "\n".join(r.render() for r in failed)
    return results


def test_criterion_01_ionization_difference_bound_holds_fast():
    # 1e5 random pairs per threshold in {0.5, 1, 2}, radius-10 balls,
    # zero violations of the Lipschitz bound, in under five seconds
    t0 = time.perf_counter()
    run_and_assert("kappa-lipschitz")
    elapsed = time.perf_counter() - t0
    print(f"kappa-lipschitz wall time {elapsed:.2f} s")
    assert elapsed < 5.0


def test_criterion_02_ionization_kernel_exact_branches():
    # kernel is exactly zero on orthogonal field/current pairs and obeys
    # 0 <= kappa <= |j| without tolerance
    run_and_assert("kappa-branches")


def test_criterion_03_distribution_function_accuracy():
    # F(0) within 1e-5 of the quadrature oracle and of 0.76515;
    # relative deviation from exp(s) at most 1e-4 for s <= -12
    run_and_assert("statistics")


def test_criterion_04_potential_operator_nonexpansive():
    # 100 omega pairs on a 64-cell line and an 8x8 two-layer plane,
    # Boltzmann and Fermi-Dirac: sup-norm contraction up to 1e-10
    run_and_assert("poisson-nonexpansive")


def test_criterion_05_balanced_levels_flatten_the_potential():
    # k2 = F2^{-1}(F1(k1)) makes the solved potential vanish to 1e-12
    run_and_assert("poisson-flat")


def test_criterion_06_newton_and_contraction_agree():
    # same solutions to 1e-8 across the criterion-4 samples; doubling the
    # contraction cut-off moves the answer by at most 1e-12
    run_and_assert("poisson-newton")


def test_criterion_07_discretization_orders():
    # spatial order 2.0 +/- 0.2 (uniform and piecewise permittivity),
    # temporal order 1.0 +/- 0.2 over four step halvings
    run_and_assert("mms-poisson")
    run_and_assert("mms-transient")


def test_criterion_08_discrete_balance_identity():
    # balance defect at most 1e-12 on every accepted step of the shipped
    # decks; interfacial load re-summation exact to 1e-15
    run_and_assert("conservation")


def test_criterion_09_equilibrium_is_stationary():
    # 100 fixed steps leave every field within 1e-10 of the start;
    # built-in potential within 1e-3 of 2 asinh(1/2) on 256 cells
    run_and_assert("equilibrium")


def test_criterion_10_positivity_and_blowup_detection():
    # densities stay positive on all accepted steps; the gained-up
    # reverse-bias deck terminates with a strictly increasing norm tail
    run_and_assert("positivity-blowup")


def test_criterion_11_decoupled_step_matches_monolithic_newton():
    # one implicit-Euler decoupled step against the six-unknown coupled
    # solve, within ten times the decoupling tolerance
    run_and_assert("gummel-monolithic")


def test_criterion_12_fixed_seed_outputs_bit_identical():
    run_and_assert("determinism")


def test_whole_acceptance_run_under_two_minutes():
    elapsed = time.perf_counter() - _MODULE_T0
    print(f"acceptance wall time {elapsed:.1f} s")
    assert elapsed < 120.0
