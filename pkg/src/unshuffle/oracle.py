"""Exhaustive maximum-likelihood estimator for desk-scale instances.

Minimizes ``||y - Pi X beta||_2`` over all permutations and all supports of
size at most ``k``.  For a fixed support ``S`` the best residual under
``Pi`` equals the residual of projecting ``Pi^T y`` (a gather) off the
column space of ``X_S``; one orthogonal factorization per support is
applied to every permuted copy of ``y`` at once.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.linalg

from .model import NumericError, Permutation, ProblemInstance, SparseSignal

N_MAX = 8
SUPPORT_CAP = 2**15
_RANK_RTOL = 1e-12


class InstanceTooLarge(ValueError):
    pass


def _orthonormal_basis(B: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``range(B)`` from a column-pivoted QR."""
    if B.shape[1] == 0:
        return np.zeros((B.shape[0], 0))
    Q, R, _ = scipy.linalg.qr(B, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return np.zeros((B.shape[0], 0))
    rank = int(np.count_nonzero(diag > _RANK_RTOL * diag[0] * max(B.shape)))
    return Q[:, :rank]


def projection_residual(y, B) -> float:
    """``||y - B B^+ y||_2`` via a rank-revealing QR."""
    y = np.asarray(y, dtype=float)
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != y.size:
        raise ValueError(f"B has {B.shape[0]} rows, y has {y.size}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(B))):
        raise NumericError("non-finite input to projection_residual")
    Q = _orthonormal_basis(B)
    return float(np.linalg.norm(y - Q @ (Q.T @ y)))


def _supports(p: int, k: int):
    for size in range(k + 1):
        yield from itertools.combinations(range(p), size)


def enumeration_size(n: int, p: int, k: int) -> tuple[int, int]:
    return math.factorial(n), sum(math.comb(p, s) for s in range(min(k, p) + 1))


def _refuse_if_large(n: int, p: int, k: int, n_max: int, p_cap: int) -> None:
    n_perm, n_supp = enumeration_size(n, p, k)
    if n > n_max or p > p_cap or math.comb(p, min(k, p)) > SUPPORT_CAP:
        raise InstanceTooLarge(
            f"ML enumeration refused: n={n} (cap {n_max}), p={p} (cap {p_cap}), k={k}; "
            f"{n_perm} permutations x {n_supp} supports"
        )


def ml_estimate(instance: ProblemInstance, k: int, n_max: int = N_MAX, p_cap: int = 12,
                return_objective: bool = False, permutations=None):
    """Exact global minimizer over (permutation, support of size <= k).

    The signal on the winning support is the minimum-norm least-squares fit.
    Ties (within ``1e-10 ||y||``) go to the lexicographically first
    permutation map, then the first support in (size, lexicographic) order.
    ``permutations`` restricts the search to the given candidates (in the
    given order).
    """
    X, y = instance.design, instance.observation
    n, p = X.shape
    k = min(k, p)
    _refuse_if_large(n, p, k, n_max, p_cap)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NumericError("non-finite instance")

    if permutations is None:
        maps = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    else:
        maps = np.array([np.asarray(getattr(m, "map", m)) for m in permutations], dtype=np.int64)
    gathered = y[maps]  # row m is Pi_m^T y
    atol = 1e-10 * float(np.linalg.norm(y))
    total = np.einsum("ij,ij->i", gathered, gathered)
    screen = 1e-8 * float(y @ y) + 2 * atol * float(np.linalg.norm(y)) + 1e-300

    best = None  # (residual, perm index, support order, support)
    for order, S in enumerate(_supports(p, k)):
        Q = _orthonormal_basis(X[:, list(S)])
        if Q.shape[1] == n:
            # spans R^n: every permutation fits exactly
            if best is None or 0.0 < best[0] - atol or (best[0] <= atol and best[1] > 0):
                best = (0.0, 0, order, S)
            continue
        # screen with ||g||^2 - ||Q'g||^2, then recompute survivors without cancellation
        coef = gathered @ Q
        approx = total - np.einsum("ij,ij->i", coef, coef)
        keep = np.flatnonzero(approx <= approx.min() + screen)
        resid = gathered[keep] - coef[keep] @ Q.T
        res = np.sqrt(np.einsum("ij,ij->i", resid, resid))
        i = int(np.argmin(res))
        i = int(np.flatnonzero(res <= res[i] + atol)[0])
        m = int(keep[i])
        val = float(res[i])
        if best is None or val < best[0] - atol:
            best = (val, m, order, S)
        elif val <= best[0] + atol and m < best[1]:
            best = (val, m, order, S)

    _, m, _, S = best
    perm = Permutation(maps[m])
    beta = np.zeros(p)
    if S:
        sol, *_ = np.linalg.lstsq(X[:, list(S)], y[perm.map], rcond=None)
        beta[list(S)] = sol
    signal = SparseSignal(beta, k)
    objective = float(np.linalg.norm(y[perm.map] - X @ beta))
    if return_objective:
        return perm, signal, objective
    return perm, signal
