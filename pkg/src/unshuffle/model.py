"""Domain types: permutations, sparse signals, problem instances, results.

Permutation convention
----------------------
A :class:`Permutation` is stored as a *destination map*: source row ``i``
lands at row ``map[i]``.  With ``y = Pi @ z`` this reads
``y[map[i]] = z[i]``, and the inverse action is the gather ``z = y[map]``.
All indices are 0-based.

Every type serializes to a plain JSON-compatible dict via ``to_dict`` and
back via ``from_dict``; floats survive the round trip bit-exactly because
``json`` writes the shortest repr.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operands have incompatible lengths or shapes."""


class NumericError(FloatingPointError):
    """Non-finite input reached a numerical routine."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Permutation:
    map: np.ndarray

    def __post_init__(self):
        m = _frozen(self.map, np.int64)
        if m.ndim != 1:
            raise ValueError("permutation map must be one-dimensional")
        if not np.array_equal(np.sort(m), np.arange(m.size)):
            raise ValueError("permutation map is not a bijection on {0..n-1}")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        m = np.arange(n)
        m[a], m[b] = b, a
        return cls(m)

    @property
    def n(self) -> int:
        return int(self.map.size)

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """``self`` after ``other``: row i goes to ``self.map[other.map[i]]``."""
        if other.n != self.n:
            raise DimensionError(f"cannot compose permutations of size {self.n} and {other.n}")
        return Permutation(self.map[other.map])

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.n, self.n))
        P[self.map, np.arange(self.n)] = 1.0
        return P

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash(self.map.tobytes())

    def __repr__(self):
        return f"Permutation({self.map.tolist()})"

    def to_dict(self) -> dict:
        return {"map": self.map.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Permutation":
        return cls(d["map"])


def hamming_distance(a: Permutation, b: Permutation) -> int:
    """Number of rows on which two permutations disagree."""
    if a.n != b.n:
        raise DimensionError(f"permutation lengths differ: {a.n} vs {b.n}")
    return int(np.count_nonzero(a.map != b.map))


def apply_permutation(p: Permutation, v) -> np.ndarray:
    """Return ``out`` with ``out[p.map[i]] = v[i]`` (rows of a matrix move too)."""
    v = np.asarray(v)
    if v.shape[0] != p.n:
        raise DimensionError(f"permutation of size {p.n} applied to length {v.shape[0]}")
    out = np.empty_like(v)
    out[p.map] = v
    return out


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """Length-``p`` vector with its support made explicit.

    ``max_support`` is the sparsity bound ``k`` checked at construction;
    it defaults to the actual support size.
    """

    entries: np.ndarray
    max_support: Optional[int] = None
    support: np.ndarray = field(init=False)

    def __post_init__(self):
        e = _frozen(self.entries, np.float64)
        if e.ndim != 1 or e.size == 0:
            raise ValueError("signal must be a non-empty vector")
        supp = _frozen(np.flatnonzero(e), np.int64)
        if self.max_support is not None and supp.size > self.max_support:
            raise ValueError(f"support size {supp.size} exceeds bound {self.max_support}")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "support", supp)

    @classmethod
    def zeros(cls, p: int) -> "SparseSignal":
        return cls(np.zeros(p), 0)

    @property
    def length(self) -> int:
        return int(self.entries.size)

    @property
    def l0(self) -> int:
        return int(self.support.size)

    def norm2(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __eq__(self, other):
        return isinstance(other, SparseSignal) and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"SparseSignal(p={self.length}, support={self.support.tolist()})"

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "entries": self.entries.tolist(),
            "support": self.support.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SparseSignal":
        s = cls(d["entries"])
        if s.length != d.get("length", s.length) or s.support.tolist() != list(d.get("support", s.support)):
            raise ValueError("serialized support/length disagree with entries")
        return s


@dataclass(frozen=True, eq=False)
class Truth:
    permutation: Permutation
    signal: SparseSignal
    noise_sigma: float

    def __post_init__(self):
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")
        object.__setattr__(self, "noise_sigma", float(self.noise_sigma))

    @property
    def snr(self) -> float:
        if self.noise_sigma == 0:
            return float("inf")
        return self.signal.norm2() ** 2 / self.noise_sigma**2

    @property
    def hamming(self) -> int:
        return hamming_distance(Permutation.identity(self.permutation.n), self.permutation)

    def to_dict(self) -> dict:
        return {
            "permutation": self.permutation.to_dict(),
            "signal": self.signal.to_dict(),
            "noise_sigma": self.noise_sigma,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Truth":
        return cls(
            Permutation.from_dict(d["permutation"]),
            SparseSignal.from_dict(d["signal"]),
            d["noise_sigma"],
        )


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    design: np.ndarray
    observation: np.ndarray
    truth: Optional[Truth] = None

    def __post_init__(self):
        X = _frozen(self.design, np.float64)
        y = _frozen(self.observation, np.float64)
        if X.ndim != 2 or y.ndim != 1:
            raise DimensionError("design must be n x p and observation length n")
        if X.shape[0] != y.size:
            raise DimensionError(f"design has {X.shape[0]} rows but observation has {y.size}")
        if self.truth is not None:
            if self.truth.permutation.n != y.size or self.truth.signal.length != X.shape[1]:
                raise DimensionError("truth dimensions do not match the design")
        object.__setattr__(self, "design", X)
        object.__setattr__(self, "observation", y)

    @property
    def n(self) -> int:
        return int(self.design.shape[0])

    @property
    def p(self) -> int:
        return int(self.design.shape[1])

    def noiseless_observation(self) -> np.ndarray:
        """``Pi X beta`` for the embedded truth."""
        if self.truth is None:
            raise ValueError("instance carries no ground truth")
        return apply_permutation(self.truth.permutation, self.design @ self.truth.signal.entries)

    def to_dict(self) -> dict:
        return {
            "design": self.design.tolist(),
            "observation": self.observation.tolist(),
            "truth": None if self.truth is None else self.truth.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemInstance":
        truth = d.get("truth")
        return cls(d["design"], d["observation"], None if truth is None else Truth.from_dict(truth))


@dataclass(frozen=True)
class RecoveryResult:
    """Estimated permutation and signal plus success events against the truth.

    The three flags are ``None`` when the instance had no ground truth.
    """

    permutation: Permutation
    signal_estimate: SparseSignal
    permutation_correct: Optional[bool] = None
    support_correct: Optional[bool] = None
    sign_consistent: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "permutation": self.permutation.to_dict(),
            "signal_estimate": self.signal_estimate.to_dict(),
            "permutation_correct": self.permutation_correct,
            "support_correct": self.support_correct,
            "sign_consistent": self.sign_consistent,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecoveryResult":
        return cls(
            Permutation.from_dict(d["permutation"]),
            SparseSignal.from_dict(d["signal_estimate"]),
            d.get("permutation_correct"),
            d.get("support_correct"),
            d.get("sign_consistent"),
        )


def dumps(obj: Any) -> str:
    return json.dumps(obj.to_dict() if hasattr(obj, "to_dict") else obj)


def save_json(obj: Any, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def as_permutation(m: Sequence[int] | Permutation) -> Permutation:
    return m if isinstance(m, Permutation) else Permutation(m)
