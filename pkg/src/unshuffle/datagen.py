"""Seeded synthetic generators for shuffled sparse-regression instances.

Randomness comes from numpy's PCG64 bit generator; Gaussian draws use
numpy's ziggurat sampler (``Generator.standard_normal``).  Cross-language
ports are expected to match moments, not bits.

Two signal/noise normalizations are supported (``GenSpec.scale``):

``"unit-noise"`` (default)
    noise standard deviation fixed at 1 and the signal rescaled so that
    ``||beta||^2 = snr``.  With absolute regularizers (``lambda = 2.0``) this
    is the setting in which recovery shows a phase transition in
    ``log snr / log n``.
``"unit-signal"``
    signal normalized to ``||beta||^2 = k`` and ``sigma = ||beta|| / sqrt(snr)``.

``snr = inf`` gives a noiseless instance with ``||beta||^2 = k`` in both modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .model import Permutation, ProblemInstance, SparseSignal, Truth, apply_permutation

DESIGN_LAWS = ("gauss", "unif")
SIGNAL_LAWS = ("rademacher", "unit", "custom")
SCALES = ("unit-noise", "unit-signal")

_DESIGN_ALIASES = {"standard-normal": "gauss", "normal": "gauss", "uniform": "unif"}


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GenSpec:
    n: int
    p: int
    k: int
    h: int = 0
    design_law: str = "gauss"
    snr: float = float("inf")
    signal_law: str = "rademacher"
    seed: int = 0
    scale: str = "unit-noise"
    custom_values: Optional[Sequence[float]] = field(default=None, compare=False)

    def __post_init__(self):
        law = _DESIGN_ALIASES.get(self.design_law, self.design_law)
        object.__setattr__(self, "design_law", law)
        if min(self.n, self.p) < 1 or self.k < 0 or self.h < 0:
            raise ValueError("need n, p >= 1 and k, h >= 0")
        if self.k > self.p:
            raise ValueError(f"k={self.k} exceeds p={self.p}")
        if self.h > self.n or self.h == 1:
            raise ValueError(f"h={self.h} is not achievable for n={self.n} (need h=0 or 2<=h<=n)")
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        if law not in DESIGN_LAWS:
            raise ValueError(f"unknown design law {self.design_law!r}")
        if self.signal_law not in SIGNAL_LAWS:
            raise ValueError(f"unknown signal law {self.signal_law!r}")
        if self.scale not in SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.signal_law == "custom":
            if self.custom_values is None or len(self.custom_values) != self.k:
                raise ValueError("custom signal law needs exactly k custom_values")
            if any(v == 0 for v in self.custom_values):
                raise ValueError("custom_values must be nonzero")

    def with_seed(self, seed: int) -> "GenSpec":
        return replace(self, seed=int(seed))


def sample_design(spec: GenSpec, seed=None) -> np.ndarray:
    rng = _rng(spec.seed if seed is None else seed)
    if spec.design_law == "gauss":
        return rng.standard_normal((spec.n, spec.p))
    return rng.uniform(-1.0, 1.0, size=(spec.n, spec.p))


def sample_permutation_with_hamming(n: int, h: int, seed=None) -> Permutation:
    """Uniform ``h`` displaced rows, moved by a uniformly random derangement.

    The derangement is drawn by rejection from uniform permutations of the
    chosen subset, so ``hamming(identity, result) == h`` exactly.
    """
    if h == 1 or h > n or h < 0:
        raise ValueError(f"no permutation of {n} rows displaces exactly {h}")
    m = np.arange(n)
    if h == 0:
        return Permutation(m)
    rng = _rng(seed)
    rows = np.sort(rng.choice(n, size=h, replace=False))
    while True:
        shuffle = rng.permutation(h)
        if np.all(shuffle != np.arange(h)):
            break
    m[rows] = rows[shuffle]
    return Permutation(m)


def sample_sparse_signal(p: int, k: int, signal_law: str = "rademacher", seed=None,
                         custom_values: Optional[Sequence[float]] = None) -> SparseSignal:
    """Exactly ``k`` nonzeros on a uniformly random support."""
    if k > p or k < 0:
        raise ValueError(f"cannot place {k} nonzeros in length {p}")
    rng = _rng(seed)
    beta = np.zeros(p)
    if k == 0:
        return SparseSignal(beta, 0)
    support = np.sort(rng.choice(p, size=k, replace=False))
    if signal_law == "rademacher":
        beta[support] = rng.choice([-1.0, 1.0], size=k)
    elif signal_law == "unit":
        beta[support] = 1.0
    elif signal_law == "custom":
        if custom_values is None or len(custom_values) != k:
            raise ValueError("custom law needs k values")
        beta[support] = np.asarray(custom_values, dtype=float)
    else:
        raise ValueError(f"unknown signal law {signal_law!r}")
    return SparseSignal(beta, k)


def sigma_from_snr(signal: SparseSignal, snr: float) -> float:
    """Noise level giving ``||beta||^2 / sigma^2 = snr``."""
    norm = signal.norm2()
    if norm == 0:
        raise ValueError("snr is undefined for the zero signal")
    if not snr > 0:
        raise ValueError("snr must be positive")
    if math.isinf(snr):
        return 0.0
    return norm / math.sqrt(snr)


def snr_from_ratio(n: int, ratio: float) -> float:
    """``snr`` such that ``log snr / log n == ratio``."""
    return float(n) ** ratio


def _calibrate(signal: SparseSignal, spec: GenSpec) -> tuple[SparseSignal, float]:
    if math.isinf(spec.snr):
        return signal, 0.0
    if signal.l0 == 0:
        if spec.scale == "unit-signal":
            raise ValueError("unit-signal scaling needs a nonzero signal")
        return signal, 1.0
    if spec.scale == "unit-signal":
        return signal, sigma_from_snr(signal, spec.snr)
    scaled = SparseSignal(signal.entries * (math.sqrt(spec.snr) / signal.norm2()), signal.max_support)
    return scaled, 1.0


def generate_instance(spec: GenSpec) -> ProblemInstance:
    """Draw ``y = Pi X beta + w`` with the truth embedded.

    Component streams are independent children of ``SeedSequence(spec.seed)``
    in the order design, signal, permutation, noise.
    """
    s_design, s_signal, s_perm, s_noise = np.random.SeedSequence(spec.seed).spawn(4)
    X = sample_design(spec, seed=s_design)
    beta = sample_sparse_signal(spec.p, spec.k, spec.signal_law, s_signal, spec.custom_values)
    beta, sigma = _calibrate(beta, spec)
    perm = sample_permutation_with_hamming(spec.n, spec.h, s_perm)
    y = apply_permutation(perm, X @ beta.entries)
    if sigma > 0:
        y = y + sigma * _rng(s_noise).standard_normal(spec.n)
    return ProblemInstance(X, y, Truth(perm, beta, sigma))
