import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unshuffle.datagen import GenSpec, generate_instance, snr_from_ratio
from unshuffle.model import NumericError, ProblemInstance
from unshuffle.solver import (
    SolverConfig,
    kkt_residual,
    lasso,
    robust_lasso,
    robust_lasso_xy,
    robust_objective,
    soft_threshold,
)


def test_soft_threshold_examples():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-0.5, 1.0) == 0.0
    assert soft_threshold(-4.25, 0.0) == -4.25
    assert soft_threshold(-3.0, 1.0) == -2.0
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def _grid_argmin(f, lo, hi):
    for _ in range(4):
        xs = np.linspace(lo, hi, 20001)
        i = int(np.argmin(f(xs)))
        step = xs[1] - xs[0]
        lo, hi = xs[max(i - 2, 0)], xs[min(i + 2, len(xs) - 1)]
    return xs[i]


@settings(max_examples=40, deadline=None)
@given(r=st.floats(-20, 20), lam=st.floats(0, 3), n=st.integers(1, 400))
def test_xi_update_matches_grid_search(r, lam, n):
    sn = math.sqrt(n)
    f = lambda xi: (r - sn * xi) ** 2 / (2 * n) + lam * np.abs(xi)
    closed = soft_threshold(r / sn, lam)
    bound = abs(r / sn) + 1
    assert abs(_grid_argmin(f, -bound, bound) - closed) < 1e-6


def _instance(n, p, k, h, ratio, seed, scale="unit-signal"):
    snr = math.inf if ratio is None else snr_from_ratio(n, ratio)
    return generate_instance(GenSpec(n=n, p=p, k=k, h=h, snr=snr, seed=seed, scale=scale))


def test_zero_solution_at_large_lambda(rng):
    X = rng.standard_normal((30, 12))
    y = rng.standard_normal(30)
    lb = np.abs(X.T @ y).max() / 30
    lx = np.abs(y).max() / math.sqrt(30)
    sol = robust_lasso(ProblemInstance(X, y), SolverConfig(lambda_beta=lb, lambda_xi=lx))
    assert not sol.beta.any() and not sol.xi.any()
    assert sol.converged and sol.kkt_residual <= 1e-15
    assert not lasso(y, X, lb).any()


def test_noiseless_tiny_lambda_recovers_signal():
    inst = _instance(100, 20, 3, 0, None, seed=1)
    sol = robust_lasso(inst, SolverConfig(lambda_beta=1e-6, lambda_xi=1e-6))
    assert sol.converged
    assert np.linalg.norm(sol.beta - inst.truth.signal.entries) <= 1e-3


def test_objective_beats_truth_feasible_point():
    rng = np.random.default_rng(0)
    for seed in range(100):
        inst = _instance(40, 30, 3, 6, 1.0, seed=seed)
        lb, lx = rng.uniform(0.01, 0.5, size=2)
        sol = robust_lasso(inst, SolverConfig(lambda_beta=lb, lambda_xi=lx))
        n = inst.n
        beta0 = inst.truth.signal.entries
        xi0 = (inst.observation - inst.design @ beta0) / math.sqrt(n)
        assert sol.objective <= robust_objective(inst.design, inst.observation, beta0, xi0, lb, lx) + 1e-12


def test_objective_field_and_kkt_certificate(rng):
    for seed in range(10):
        inst = _instance(50, 30, 4, 5, 2.0, seed=seed)
        sol = robust_lasso(inst, SolverConfig(lambda_beta=0.05, lambda_xi=0.1))
        again = robust_objective(inst.design, inst.observation, sol.beta, sol.xi, 0.05, 0.1)
        assert math.isclose(sol.objective, again, rel_tol=1e-10)
        assert sol.converged and sol.kkt_residual <= 1e-6
        # certificate recomputed in original units, scaled by the observation RMS
        s = np.linalg.norm(inst.observation) / math.sqrt(inst.n)
        assert kkt_residual(inst.design, inst.observation, sol.beta, sol.xi, 0.05, 0.1) <= 1e-6 * s


def test_monotone_trace():
    for seed in range(20):
        inst = _instance(60, 40, 4, 8, 2.0, seed=seed)
        sol = robust_lasso(inst, SolverConfig(lambda_beta=0.02, lambda_xi=0.05, continuation=False))
        tr = sol.trace
        assert len(tr) == sol.sweeps_used
        assert np.all(np.diff(tr) <= 1e-12 * np.abs(tr[:-1]))


def test_orthogonal_design_closed_form(rng):
    n, p = 50, 8
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    X = math.sqrt(n) * Q  # X'X / n = I
    y = rng.standard_normal(n) * 2
    lam = 0.3
    expected = [soft_threshold(v, lam) for v in X.T @ y / n]
    np.testing.assert_allclose(lasso(y, X, lam), expected, atol=1e-8)


def test_lasso_equals_robust_with_infinite_xi_penalty():
    for seed in range(10):
        inst = _instance(40, 60, 5, 4, 1.5, seed=seed)
        a = lasso(inst.observation, inst.design, 0.05)
        b = robust_lasso(inst, SolverConfig(lambda_beta=0.05, lambda_xi=math.inf))
        assert not b.xi.any()
        np.testing.assert_allclose(a, b.beta, atol=1e-8)


def test_row_permutation_leaves_objective_unchanged():
    for seed in range(10):
        inst = _instance(50, 40, 4, 6, 2.0, seed=seed)
        cfg = SolverConfig(lambda_beta=0.03, lambda_xi=0.08, tol=1e-10)
        a = robust_lasso(inst, cfg)
        order = np.random.default_rng(seed).permutation(inst.n)
        b = robust_lasso(ProblemInstance(inst.design[order], inst.observation[order]), cfg)
        assert math.isclose(a.objective, b.objective, rel_tol=1e-10)
        np.testing.assert_allclose(a.beta, b.beta, atol=1e-6)
        np.testing.assert_allclose(a.xi[order], b.xi, atol=1e-6)


@pytest.mark.parametrize("c", [1e-3, 7.0, 1e5])
def test_homogeneity(c):
    inst = _instance(50, 40, 4, 6, 2.0, seed=3)
    a = robust_lasso_xy(inst.design, inst.observation, SolverConfig(lambda_beta=0.03, lambda_xi=0.08))
    b = robust_lasso_xy(inst.design, c * inst.observation,
                        SolverConfig(lambda_beta=0.03 * c, lambda_xi=0.08 * c))
    np.testing.assert_allclose(b.beta, c * a.beta, rtol=1e-6, atol=1e-7 * c)
    np.testing.assert_allclose(b.xi, c * a.xi, rtol=1e-6, atol=1e-7 * c)


def test_non_finite_input_rejected(rng):
    X = rng.standard_normal((5, 3))
    y = np.array([1.0, np.nan, 0.0, 0.0, 1.0])
    with pytest.raises(NumericError):
        robust_lasso_xy(X, y, SolverConfig(lambda_beta=0.1, lambda_xi=0.1))


def test_sweep_budget_exhaustion_reports_nonconvergence():
    inst = _instance(60, 40, 4, 8, 2.0, seed=0)
    sol = robust_lasso(inst, SolverConfig(lambda_beta=1e-4, lambda_xi=1e-4, max_sweeps=2,
                                          continuation=False))
    assert not sol.converged and sol.sweeps_used == 2


def test_zero_column_stays_zero(rng):
    X = rng.standard_normal((20, 5))
    X[:, 2] = 0.0
    y = X @ np.array([1.0, 0, 0, -1.0, 0]) + 0.01 * rng.standard_normal(20)
    sol = robust_lasso_xy(X, y, SolverConfig(lambda_beta=1e-3, lambda_xi=0.5))
    assert sol.beta[2] == 0.0 and sol.converged


def test_large_dynamic_range_converges():
    # unit-noise scaling at high snr: |beta| ~ 1e6, lambda = 2
    inst = _instance(180, 500, 5, 20, 6.0, seed=0, scale="unit-noise")
    sol = robust_lasso(inst, SolverConfig(lambda_beta=2.0, lambda_xi=2.0))
    assert sol.converged
    err = np.linalg.norm(sol.beta - inst.truth.signal.entries) / inst.truth.signal.norm2()
    assert err < 1e-4
