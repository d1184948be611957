"""Coordinate descent for the robust (outlier-augmented) Lasso and plain Lasso.

Robust Lasso objective, with residual ``r = y - X beta - sqrt(n) xi``::

    (1/2n) ||r||^2 + lambda_xi ||xi||_1 + lambda_beta ||beta||_1

The plain Lasso is the same problem with ``xi`` frozen at zero.

Every coordinate update is an exact one-dimensional minimization, so the
objective never increases.  Updates::

    beta_j <- S(x_j' (r + x_j beta_j), n lambda_beta) / ||x_j||^2
    xi_i   <- S(r_i / sqrt(n) + xi_i, lambda_xi)

with ``S`` the soft threshold.  Sweep order is fixed: beta_0..beta_{p-1}
then xi_0..xi_{n-1}.  Between full sweeps, extra passes over the nonzero
coordinates only (active set) speed up convergence; convergence is only
declared after a *full* sweep whose largest coordinate change is below
``tol``.

The problem is homogeneous: scaling ``(y, lambdas)`` by ``c`` scales
``(beta, xi)`` by ``c``.  The solver works on ``y / s`` with
``s = ||y||_2 / sqrt(n)``, so ``tol`` and ``kkt_tol`` are measured in units
of the observation RMS.  Small regularizers are reached along a geometric
continuation path (warm starts) from the smallest ``lambda`` giving the zero
solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .model import DimensionError, NumericError, ProblemInstance


def soft_threshold(z: float, t: float) -> float:
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    if abs(z) <= t:
        return 0.0
    return math.copysign(abs(z) - t, z)


@dataclass(frozen=True)
class SolverConfig:
    lambda_beta: float
    lambda_xi: float = math.inf
    max_sweeps: int = 10000
    tol: float = 1e-8
    kkt_tol: float = 1e-6
    continuation: bool = True
    path_per_decade: int = 5

    def __post_init__(self):
        if not self.lambda_beta > 0:
            raise ValueError("lambda_beta must be positive")
        if not self.lambda_xi >= 0:
            raise ValueError("lambda_xi must be nonnegative")
        if not self.tol > 0 or not self.kkt_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


def theory_lambdas(n: int, p: int, sigma: float, c0: float = 2.0, c1: float = 2.0) -> tuple[float, float]:
    """``(c0 sigma sqrt(log p / n), c1 sigma sqrt(log n / n))``."""
    return c0 * sigma * math.sqrt(math.log(p) / n), c1 * sigma * math.sqrt(math.log(n) / n)


@dataclass
class RobustLassoSolution:
    beta: np.ndarray
    xi: np.ndarray
    objective: float
    sweeps_used: int
    kkt_residual: float
    converged: bool
    lambda_beta: float = 0.0
    lambda_xi: float = 0.0
    active_passes: int = 0
    trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "xi": self.xi.tolist(),
            "objective": self.objective,
            "sweeps_used": self.sweeps_used,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
            "lambda_beta": self.lambda_beta,
            "lambda_xi": self.lambda_xi if math.isfinite(self.lambda_xi) else None,
        }


def robust_objective(X, y, beta, xi, lambda_beta, lambda_xi) -> float:
    n = X.shape[0]
    r = y - X @ beta - math.sqrt(n) * xi
    val = 0.5 / n * float(r @ r) + lambda_beta * float(np.abs(beta).sum())
    if np.any(xi):
        val += lambda_xi * float(np.abs(xi).sum())
    return val


def kkt_residual(X, y, beta, xi, lambda_beta, lambda_xi, use_xi: bool = True) -> float:
    """Largest violation of the subgradient optimality conditions."""
    n = X.shape[0]
    r = y - X @ beta - math.sqrt(n) * xi
    g = X.T @ r / n
    nz = beta != 0
    viol = np.where(nz, np.abs(g - np.sign(beta) * lambda_beta), np.maximum(np.abs(g) - lambda_beta, 0.0))
    worst = float(viol.max(initial=0.0))
    if use_xi:
        gx = r / math.sqrt(n)
        nzx = xi != 0
        if math.isinf(lambda_xi):
            vx = np.where(nzx, np.inf, 0.0)
        else:
            vx = np.where(nzx, np.abs(gx - np.sign(xi) * lambda_xi), np.maximum(np.abs(gx) - lambda_xi, 0.0))
        worst = max(worst, float(vx.max(initial=0.0)))
    return worst


@numba.njit(cache=True)
def _pass(X, col_sq, r, beta, xi, lb, lx, use_xi, active_only):
    n, p = X.shape
    sn = math.sqrt(n)
    tb = n * lb
    md = 0.0
    for j in range(p):
        cj = col_sq[j]
        old = beta[j]
        if cj == 0.0 or (active_only and old == 0.0):
            continue
        z = 0.0
        for i in range(n):
            z += X[i, j] * r[i]
        z += cj * old
        if z > tb:
            new = (z - tb) / cj
        elif z < -tb:
            new = (z + tb) / cj
        else:
            new = 0.0
        d = new - old
        if d != 0.0:
            for i in range(n):
                r[i] -= d * X[i, j]
            beta[j] = new
            if abs(d) > md:
                md = abs(d)
    if use_xi:
        for i in range(n):
            old = xi[i]
            if active_only and old == 0.0:
                continue
            z = r[i] / sn + old
            if z > lx:
                new = z - lx
            elif z < -lx:
                new = z + lx
            else:
                new = 0.0
            d = new - old
            if d != 0.0:
                r[i] -= sn * d
                xi[i] = new
                if abs(d) > md:
                    md = abs(d)
    return md


@numba.njit(cache=True)
def _objective(r, beta, xi, lb, lx, use_xi):
    n = r.size
    val = 0.0
    for i in range(n):
        val += r[i] * r[i]
    val *= 0.5 / n
    s = 0.0
    for j in range(beta.size):
        s += abs(beta[j])
    val += lb * s
    if use_xi:
        s = 0.0
        for i in range(n):
            s += abs(xi[i])
        if s > 0.0:
            val += lx * s
    return val


@numba.njit(cache=True)
def _stage(X, col_sq, r, beta, xi, lb, lx, use_xi, max_full, tol, trace, record):
    """Run sweeps at fixed lambdas. Returns (full sweeps, active passes, converged)."""
    full = 0
    active = 0
    n_active_cap = 50 * (X.shape[1] + X.shape[0])
    while full < max_full:
        md = _pass(X, col_sq, r, beta, xi, lb, lx, use_xi, False)
        if record:
            trace[full] = _objective(r, beta, xi, lb, lx, use_xi)
        full += 1
        if md < tol:
            return full, active, True
        inner = 0
        while inner < n_active_cap:
            md = _pass(X, col_sq, r, beta, xi, lb, lx, use_xi, True)
            inner += 1
            if md < tol:
                break
        active += inner
    return full, active, False


def _check_inputs(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise DimensionError(f"design {X.shape} incompatible with observation {y.shape}")
    if min(X.shape) < 1:
        raise DimensionError("need n, p >= 1")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NumericError("design or observation contains non-finite values")
    return np.asfortranarray(X), y


def _fit(X, y, lambda_beta, lambda_xi, cfg: SolverConfig, use_xi: bool) -> RobustLassoSolution:
    X, y = _check_inputs(X, y)
    n, p = X.shape
    sn = math.sqrt(n)
    scale = float(np.linalg.norm(y)) / sn
    if scale == 0.0:
        scale = 1.0
    ys = y / scale
    lb = lambda_beta / scale
    lx = (lambda_xi / scale) if use_xi else math.inf

    col_sq = np.einsum("ij,ij->j", X, X)
    beta = np.zeros(p)
    xi = np.zeros(n)
    r = ys.copy()

    # lambda at which (0, 0) is already optimal
    lb_max = float(np.abs(X.T @ ys).max()) / n
    lx_max = float(np.abs(ys).max()) / sn
    start = lb_max / lb
    if use_xi and lx > 0:
        start = max(start, lx_max / lx)
    factors = [1.0]
    if cfg.continuation and start > 1.0:
        steps = max(1, math.ceil(cfg.path_per_decade * math.log10(start)))
        factors = list(np.geomspace(start, 1.0, steps + 1)[1:])
        factors[-1] = 1.0

    trace = np.zeros(cfg.max_sweeps)
    sweeps = active = 0
    converged = False
    tol = cfg.tol
    for f in factors[:-1]:
        budget = cfg.max_sweeps - sweeps
        if budget <= 1:
            break
        s_full, s_act, _ = _stage(X, col_sq, r, beta, xi, lb * f, lx * f, use_xi, budget - 1,
                                  tol, trace, False)
        sweeps += s_full
        active += s_act

    n_trace = 0
    kkt = math.inf
    while True:
        budget = cfg.max_sweeps - sweeps
        if budget <= 0:
            break
        s_full, s_act, ok = _stage(X, col_sq, r, beta, xi, lb, lx, use_xi, budget, tol,
                                   trace[n_trace:], True)
        sweeps += s_full
        active += s_act
        n_trace += s_full
        kkt = kkt_residual(X, ys, beta, xi, lb, lx, use_xi)
        if not ok:
            break
        if kkt <= cfg.kkt_tol:
            converged = True
            break
        tol /= 10.0
        if tol < 1e-15:
            break
    if not math.isfinite(kkt):
        kkt = kkt_residual(X, ys, beta, xi, lb, lx, use_xi)

    beta_o = beta * scale
    xi_o = xi * scale
    obj = robust_objective(X, y, beta_o, xi_o, lambda_beta, lambda_xi if use_xi else 0.0)
    return RobustLassoSolution(
        beta=beta_o,
        xi=xi_o,
        objective=obj,
        sweeps_used=sweeps,
        kkt_residual=kkt,
        converged=converged,
        lambda_beta=lambda_beta,
        lambda_xi=lambda_xi if use_xi else math.inf,
        active_passes=active,
        trace=trace[:n_trace] * scale**2,
    )


def robust_lasso(instance: ProblemInstance, cfg: SolverConfig) -> RobustLassoSolution:
    """Jointly fit the sparse signal and the sparse outlier vector ``xi``."""
    return robust_lasso_xy(instance.design, instance.observation, cfg)


def robust_lasso_xy(X, y, cfg: SolverConfig) -> RobustLassoSolution:
    return _fit(X, y, cfg.lambda_beta, cfg.lambda_xi, cfg, use_xi=math.isfinite(cfg.lambda_xi))


def lasso(y, X, lam: float, cfg: SolverConfig | None = None) -> np.ndarray:
    """Plain Lasso ``(1/2n)||y - X b||^2 + lam ||b||_1``; returns ``b``."""
    return lasso_solution(y, X, lam, cfg).beta


def lasso_solution(y, X, lam: float, cfg: SolverConfig | None = None) -> RobustLassoSolution:
    cfg = cfg or SolverConfig(lambda_beta=lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return _fit(X, y, lam, math.inf, cfg, use_xi=False)
