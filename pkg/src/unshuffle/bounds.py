"""Information-theoretic recovery thresholds, evaluated in the log domain.

All logarithms are natural.  The additive constant ``2`` in the exact
recovery condition is used verbatim (in nats).

Exact recovery is impossible (minimax error >= 1/2) when::

    n ln(1 + snr) + 2 <= ln(n! C(p, k))

Approximate recovery within distortion ``D`` is impossible when::

    n ln(1 + snr) + ln 4 <= ln zeta(n, p, k, D)

    zeta = p! / ((k!)^2 ((p-k)!)^2)
           / sum_{i=1..D} sum_{j=1..min(D-i, k)} 1 / ((n-i)! (k-j)! (p-k-j)! (j!)^2)

Terms whose factorial arguments would be negative are dropped.  An empty
index range (``D = 1``) makes the sum zero and ``zeta`` infinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

LN4 = math.log(4.0)
EXACT_CONSTANT = 2.0


def log_factorial(m):
    """``ln(m!)`` through the log-gamma function; works elementwise on arrays."""
    if np.ndim(m) == 0:
        if m < 0:
            raise ValueError("factorial of a negative number")
        return math.lgamma(m + 1)
    m = np.asarray(m)
    if np.any(m < 0):
        raise ValueError("factorial of a negative number")
    return gammaln(m + 1.0)


def log_binomial(p: int, k: int) -> float:
    if not 0 <= k <= p:
        return -math.inf
    return log_factorial(p) - log_factorial(k) - log_factorial(p - k)


@dataclass(frozen=True)
class BoundQuery:
    n: int
    p: int
    k: int
    snr: float
    D: int = 0

    def __post_init__(self):
        if min(self.n, self.p) < 1 or self.k < 0:
            raise ValueError("need n, p >= 1 and k >= 0")
        if self.k > self.p:
            raise ValueError(f"k={self.k} exceeds p={self.p}")
        if not self.snr >= 0:
            raise ValueError("snr must be nonnegative")
        if not 0 <= self.D <= self.n + self.k:
            raise ValueError(f"D={self.D} outside [0, n+k]")

    @property
    def log_capacity_lhs(self) -> float:
        """``n ln(1 + snr)``."""
        return self.n * math.log1p(self.snr)


def log_hypothesis_count(n: int, p: int, k: int) -> float:
    """``ln(n! C(p, k))``."""
    return log_factorial(n) + log_binomial(p, k)


def rate(q: BoundQuery) -> float:
    """Code rate ``ln(C(p, k) n!) / n`` in nats per measurement."""
    return log_hypothesis_count(q.n, q.p, q.k) / q.n


def capacity(q: BoundQuery) -> float:
    """Gaussian channel capacity ``0.5 ln(1 + snr)`` in nats per measurement."""
    return 0.5 * math.log1p(q.snr)


def exact_recovery_infeasible(q: BoundQuery) -> bool:
    if math.isinf(q.snr):
        return False
    return q.log_capacity_lhs + EXACT_CONSTANT <= log_hypothesis_count(q.n, q.p, q.k)


def exact_threshold_snr(n: int, p: int, k: int) -> float:
    """Largest snr at which the exact-recovery condition still holds (may be < 0)."""
    return math.expm1((log_hypothesis_count(n, p, k) - EXACT_CONSTANT) / n)


def log_zeta(q: BoundQuery) -> float:
    n, p, k, D = q.n, q.p, q.k, q.D
    if D == 0:
        return log_hypothesis_count(n, p, k)
    prefactor = log_factorial(p) - 2 * log_factorial(k) - 2 * log_factorial(p - k)
    i = np.arange(1, D + 1)
    jmax = np.minimum(D - i, k)
    if jmax.max(initial=0) < 1:
        return math.inf
    ii = np.repeat(i, np.maximum(jmax, 0))
    jj = np.concatenate([np.arange(1, m + 1) for m in jmax if m >= 1])
    ok = (n - ii >= 0) & (k - jj >= 0) & (p - k - jj >= 0)
    if not ok.any():
        raise ArithmeticError(f"every term of the zeta sum is infeasible for n={n}, p={p}, k={k}, D={D}")
    ii, jj = ii[ok], jj[ok]
    terms = -(gammaln(n - ii + 1.0) + gammaln(k - jj + 1.0) + gammaln(p - k - jj + 1.0)
              + 2 * gammaln(jj + 1.0))
    return prefactor - float(logsumexp(terms))


def approx_recovery_infeasible(q: BoundQuery) -> bool:
    if math.isinf(q.snr):
        return False
    return q.log_capacity_lhs + LN4 <= log_zeta(q)


def summary(q: BoundQuery) -> dict:
    """Everything the ``bounds`` command prints."""
    try:
        lz = log_zeta(q)
    except ArithmeticError:
        lz = math.nan
    return {
        "n": q.n,
        "p": q.p,
        "k": q.k,
        "snr": q.snr,
        "D": q.D,
        "log_zeta": lz,
        "rate": rate(q),
        "capacity": capacity(q),
        "rate_exceeds_capacity": rate(q) > capacity(q),
        "exact_threshold_snr": exact_threshold_snr(q.n, q.p, q.k),
        "exact_recovery_infeasible": exact_recovery_infeasible(q),
        "approx_recovery_infeasible": None if math.isnan(lz) else approx_recovery_infeasible(q),
    }
