"""Two-stage recovery: permutation by linear assignment, then support by Lasso.

Stage I fits the robust Lasso, then solves ``max_Pi <y, Pi X beta~>``.  The
assignment cost ``y_i z_j`` is rank one, so by the rearrangement inequality
matching the sorted orders of ``y`` and ``z = X beta~`` is globally optimal;
no general O(n^3) assignment solver is needed.

Stage II un-permutes ``y``, fits a plain Lasso and keeps the ``k`` largest
entries in magnitude.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    DimensionError,
    Permutation,
    ProblemInstance,
    RecoveryResult,
    SparseSignal,
)
from .solver import SolverConfig, lasso_solution, robust_lasso, theory_lambdas

LAMBDA_MODES = ("constant", "theory")
BRUTEFORCE_MAX_N = 9


@dataclass(frozen=True)
class AssignmentSolution:
    permutation: Permutation
    objective: float


def assignment_objective(y, z, perm: Permutation) -> float:
    """``<y, Pi z>`` as an exactly rounded sum (order independent)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    return math.fsum(y[perm.map] * z)


def _check_pair(y, z):
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.ndim != 1 or y.shape != z.shape:
        raise DimensionError(f"cannot match vectors of shapes {y.shape} and {z.shape}")
    return y, z


def lap_match(y, z) -> AssignmentSolution:
    """Permutation maximizing ``<y, Pi z>`` by rank matching.

    Both vectors are stably sorted; within a run of equal ``z`` values the
    assigned destinations are handed out in increasing row order, so a
    constant ``z`` yields the identity.
    """
    y, z = _check_pair(y, z)
    n = y.size
    oz = np.argsort(z, kind="stable")
    oy = np.argsort(y, kind="stable")
    dest = np.empty(n, dtype=np.int64)
    zs = z[oz]
    start = 0
    for stop in range(1, n + 1):
        if stop == n or zs[stop] != zs[start]:
            dest[oz[start:stop]] = np.sort(oy[start:stop])
            start = stop
    perm = Permutation(dest)
    return AssignmentSolution(perm, assignment_objective(y, z, perm))


def lap_bruteforce(y, z) -> AssignmentSolution:
    """Exhaustive maximum over all ``n!`` permutations (``n <= 9``).

    Ties are resolved in favour of the lexicographically first map.
    """
    y, z = _check_pair(y, z)
    n = y.size
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force refused for n={n} > {BRUTEFORCE_MAX_N} ({math.factorial(n)} permutations)")
    if n == 0:
        raise DimensionError("empty vectors")
    maps = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    approx = (y[maps] * z).sum(axis=1)
    slack = 1e-9 * (float(np.abs(y).sum() * np.abs(z).max()) + 1e-300)
    best_perm, best_val = None, -math.inf
    for idx in np.flatnonzero(approx >= approx.max() - slack):
        val = math.fsum(y[maps[idx]] * z)
        if val > best_val:
            best_perm, best_val = maps[idx], val
    return AssignmentSolution(Permutation(best_perm), best_val)


def hard_threshold_topk(v, k: int) -> SparseSignal:
    """Keep the ``k`` largest-magnitude entries; ties go to the lower index."""
    v = np.asarray(v, dtype=float)
    if k < 0 or k > v.size:
        raise ValueError(f"k={k} outside [0, {v.size}]")
    out = np.zeros_like(v)
    keep = np.argsort(-np.abs(v), kind="stable")[:k]
    out[keep] = v[keep]
    return SparseSignal(out, k)


@dataclass(frozen=True)
class Lambdas:
    beta: float
    xi: float
    lasso: float


def select_lambdas(instance: ProblemInstance, mode: str = "constant", constant: float = 2.0,
                   c: float = 2.0) -> Lambdas:
    """Regularizers for the two stages.

    ``constant`` uses the same absolute value everywhere; ``theory`` uses
    ``c sigma sqrt(log p / n)`` (signal, support Lasso) and
    ``c sigma sqrt(log n / n)`` (outliers) with ``sigma`` read from the truth.
    """
    if mode == "constant":
        return Lambdas(constant, constant, constant)
    if mode != "theory":
        raise ValueError(f"unknown lambda mode {mode!r}")
    if instance.truth is None:
        raise ValueError("theory-mode regularizers need the noise level; use constant mode")
    sigma = instance.truth.noise_sigma
    if sigma == 0:
        raise ValueError("theory-mode regularizers vanish for noiseless data; use constant mode")
    lb, lx = theory_lambdas(instance.n, instance.p, sigma, c, c)
    return Lambdas(lb, lx, lb)


@dataclass(frozen=True)
class RecoveryDiagnostics:
    sweeps: int
    converged: bool


def recover(instance: ProblemInstance, cfg: Optional[SolverConfig], k: int, *,
            lambda_mode: str = "constant", constant_lambda: float = 2.0,
            lambda_lasso: Optional[float] = None, with_diagnostics: bool = False):
    """Permutation and support recovery for one instance.

    When ``cfg`` is given its regularizers are used for the robust Lasso and
    ``lambda_lasso`` (default: ``cfg.lambda_beta``) for the support Lasso;
    otherwise regularizers come from ``lambda_mode``.
    """
    if not 0 <= k <= instance.p:
        raise ValueError(f"k={k} outside [0, {instance.p}]")
    if cfg is None:
        lam = select_lambdas(instance, lambda_mode, constant_lambda)
        cfg = SolverConfig(lambda_beta=lam.beta, lambda_xi=lam.xi)
        lam_support = lam.lasso if lambda_lasso is None else lambda_lasso
    else:
        lam_support = cfg.lambda_beta if lambda_lasso is None else lambda_lasso

    X, y = instance.design, instance.observation
    stage1 = robust_lasso(instance, cfg)
    assignment = lap_match(y, X @ stage1.beta)
    perm = assignment.permutation
    y_restored = y[perm.map]
    support_cfg = SolverConfig(lambda_beta=lam_support, max_sweeps=cfg.max_sweeps, tol=cfg.tol,
                               kkt_tol=cfg.kkt_tol, continuation=cfg.continuation,
                               path_per_decade=cfg.path_per_decade)
    stage2 = lasso_solution(y_restored, X, lam_support, support_cfg)
    estimate = hard_threshold_topk(stage2.beta, k)

    perm_ok = supp_ok = sign_ok = None
    if instance.truth is not None:
        truth = instance.truth
        perm_ok = perm == truth.permutation
        supp_ok = np.array_equal(estimate.support, truth.signal.support)
        sign_ok = bool(np.array_equal(np.sign(estimate.entries), np.sign(truth.signal.entries)))
    result = RecoveryResult(perm, estimate, perm_ok, supp_ok, sign_ok)
    if with_diagnostics:
        diag = RecoveryDiagnostics(stage1.sweeps_used + stage2.sweeps_used,
                                   stage1.converged and stage2.converged)
        return result, diag
    return result
