"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line
in the terminal summary (see conftest.py).

Stochastic criteria use master seed 0, the command-line default; seeds were
not tuned. Pinned iteration counts were measured once with ``tol_conv=1e-9``
(197 and 223 steps) and carry 2x slack.
"""
import math
import time

import numpy as np
import pytest

from sbmgrowth import detmap, verify
from sbmgrowth.core import ModelParams, Population, SeedSpec
from sbmgrowth.detmap import DetParams, Stability
from sbmgrowth.dynamics import run_trajectory, run_trials, trajectory_csv
from sbmgrowth.sbm import ColoredVertexSet

from conftest import PARITY, SEGREGATION

SEED = 0

N1_MAX_ITER = 394  # measured 197
N2_MAX_ITER = 446  # measured 223
SEGREGATION_T = 18  # first round where the map from 32/70 is below 0.35


def log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


@pytest.mark.criterion(1, "fixed points {0, 1/2, 1}; identity map at rho = 1")
def test_fixed_point_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    rhos = log_uniform(rng, 1e-3, 1e3, 1000)
    lams = log_uniform(rng, 1e-3, 10.0, 1000)
    worst = 0.0
    for rho, lam in zip(rhos, lams):
        p = DetParams(rho, lam)
        for xs in (0.0, 0.5, 1.0):
            worst = max(worst, abs(detmap.f_update(xs, p) - xs))
    assert worst < 1e-14
    grid = np.linspace(0.0, 1.0, 1001)
    for lam in (1e-3, 0.1, 1.0, 10.0):
        assert np.max(np.abs(detmap.f_update(grid, DetParams(1.0, lam)) - grid)) < 1e-12
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion(2, "f'(0) and f'(1/2): closed forms vs derivative vs central differences")
def test_derivative_values():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    h = 1e-6
    # moderate rho so the O(h^2) truncation error stays well under 1e-5
    for rho, lam in zip(log_uniform(rng, 0.1, 10.0, 10), log_uniform(rng, 0.01, 10.0, 10)):
        p = DetParams(rho, lam)
        closed = {0.0: detmap.fprime_at_boundary(p), 0.5: detmap.fprime_at_half(p), 1.0: detmap.fprime_at_boundary(p)}
        for x, value in closed.items():
            assert detmap.f_derivative(x, p) == pytest.approx(value, rel=1e-12, abs=1e-12)
            fd = (detmap._f_formula(x + h, rho, lam) - detmap._f_formula(x - h, rho, lam)) / (2 * h)
            assert abs(fd - value) < 1e-5
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion(3, "stability table for (12, 2) and (0.2, 2)")
def test_stability_table():
    s = [fp.stability for fp in detmap.fixed_points(DetParams(12.0, 2.0))]
    assert s == [Stability.STABLE, Stability.UNSTABLE, Stability.STABLE]
    s = [fp.stability for fp in detmap.fixed_points(DetParams(0.2, 2.0))]
    assert s == [Stability.UNSTABLE, Stability.STABLE, Stability.UNSTABLE]


def _strictly_monotone(xs):
    d = np.diff(xs)
    return bool(np.all(d > 0) or np.all(d < 0))


@pytest.mark.criterion(4, "deterministic convergence to 1/2 (parity) and 0 (segregation)")
def test_deterministic_convergence():
    t0 = time.perf_counter()
    for x0, params, target, cap in ((5 / 70, PARITY, 0.5, N1_MAX_ITER), (32 / 70, SEGREGATION, 0.0, N2_MAX_ITER)):
        traj = detmap.iterate(x0, DetParams.from_model(params), max_iter=cap, tol_conv=1e-9)
        assert traj.converged_to == target
        assert traj.iterations <= cap
        assert abs(traj.xs[-1] - target) < 1e-6
        assert _strictly_monotone(traj.xs)
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion(5, "E[R]/E[R+B] equals Gamma(phi) on 10^4 fuzzed cases")
def test_expectation_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(10_000):
        n = int(rng.integers(1, 100_000))
        n_red = int(rng.integers(0, n + 1))
        a, b, al, be = log_uniform(rng, 1e-2, 1e2, 4)
        worst = max(worst, verify.gamma_ratio_identity_check(Population(n_red, n - n_red), ModelParams(a, b, al, be, 0.5)))
    assert worst < 1e-12
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion(6, "Monte Carlo mean of R and B vs closed form (n=1000, 10^4 graphs)")
def test_monte_carlo_color_weights():
    pop = Population(300, 700)
    mc = verify.monte_carlo_color_weights(pop, PARITY, 10_000, SeedSpec(SEED))
    er, eb = verify.expected_color_weights(pop, PARITY)
    print(f"R: {mc['mean_r']:.3f} +- {mc['se_r']:.3f} vs {er:.3f}; B: {mc['mean_b']:.3f} +- {mc['se_b']:.3f} vs {eb:.3f}")
    assert abs(mc["mean_r"] - er) / er < 0.01
    assert abs(mc["mean_b"] - eb) / eb < 0.01
    assert abs(mc["mean_r"] - er) <= 3 * mc["se_r"]
    assert abs(mc["mean_b"] - eb) <= 3 * mc["se_b"]


@pytest.mark.criterion(7, "one-step mean of phi inside [L - 3se, U + 3se] (n=2000, phi=0.3)")
def test_one_step_sandwich():
    pop = Population(600, 1400)
    bp = verify.bounds_L_U(pop.phi, pop.n, PARITY, 0.25)
    mean, se = verify.monte_carlo_phi_next(pop, PARITY, 10_000, SeedSpec(SEED))
    print(f"L={bp.lower:.5f} mean={mean:.5f} (se {se:.5f}) U={bp.upper:.5f}")
    assert bp.lower - 3 * se <= mean <= bp.upper + 3 * se


@pytest.mark.criterion(8, "tiny-n exact enumeration vs 10^6-sample Monte Carlo")
def test_tiny_enumeration():
    verts = ColoredVertexSet(np.array([1, 1, 2], dtype=np.int8))
    params = verify.rescale_for_tiny(PARITY, verts.n)
    assert max(params.a, params.b) / verts.n <= 1.0
    exact, p_empty = verify.enumerate_expected_ratio(verts, params)
    mean, se, _ = verify.monte_carlo_conditional_ratio(verts, params, 1_000_000, SeedSpec(SEED))
    print(f"exact={exact:.6f} mc={mean:.6f} se={se:.6f} P(empty)={p_empty:.6f}")
    assert abs(mean - exact) <= 3 * se


@pytest.mark.criterion(9, "lower bound on E[R]/E[R+B] holds on the admissible grid")
def test_lower_bound_margin():
    checked = 0
    for params in (PARITY, SEGREGATION):
        for n in (10**2, 10**3, 10**4):
            for eps in (0.1, 0.25, 0.4):
                lo = math.ceil(n ** (0.5 + eps) * (1 - 1e-12))
                # n_B >= n/2 caps n_R at n/2; some cells admit no population
                for n_red in range(lo, n // 2 + 1):
                    margin = verify.expected_ratio_lower_bound_check(Population(n_red, n - n_red), params, eps)
                    assert margin >= 0.0, (n, eps, n_red, margin)
                    checked += 1
    assert checked > 0


@pytest.mark.criterion(10, "stochastic phases: parity from 5/70, minority decline from 32/70")
def test_stochastic_phases():
    runs = run_trials(Population(5, 65), PARITY, 60, SEED, 50)
    final = np.array([r[-1].phi for r in runs])
    print(f"parity: median phi_60 = {np.median(final):.4f}")
    assert np.median(np.abs(final - 0.5)) < 0.1
    assert np.median(final) > 5 / 70

    # T is where the map has dropped below 0.35
    xs = detmap.iterate(32 / 70, DetParams.from_model(SEGREGATION), max_iter=SEGREGATION_T, tol_conv=1e-15).xs
    assert xs[SEGREGATION_T] < 0.35 <= xs[SEGREGATION_T - 1]
    runs = run_trials(Population(32, 38), SEGREGATION, SEGREGATION_T, SEED, 50)
    final = np.array([r[-1].phi for r in runs])
    print(f"segregation: median phi_{SEGREGATION_T} = {np.median(final):.4f}")
    assert np.median(final) < 32 / 70 - 0.05


@pytest.mark.criterion(11, "all-blue start absorbs; identical seeds give identical CSV bytes")
def test_absorption_and_determinism():
    recs = run_trajectory(Population(0, 70), PARITY, 100, SeedSpec(SEED))
    assert len(recs) == 101 and all(r.phi == 0.0 for r in recs)
    a = trajectory_csv(run_trajectory(Population(5, 65), PARITY, 60, SeedSpec(SEED, 7))).encode()
    b = trajectory_csv(run_trajectory(Population(5, 65), PARITY, 60, SeedSpec(SEED, 7))).encode()
    assert a == b


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
