"""Monte Carlo phase-transition sweeps over (n, k, h, log snr / log n).

Cells are enumerated in the order ``n_list x k_list x h_list x ratio_grid``
(ratio fastest).  Trial ``t`` of cell ``c`` draws its instance from the
64-bit seed ``SeedSequence(base_seed, spawn_key=(c, t))``, so results do not
depend on how trials are distributed over worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .datagen import GenSpec, generate_instance, snr_from_ratio
from .recovery import LAMBDA_MODES, recover

log = logging.getLogger(__name__)

CSV_HEADER = ["n", "p", "k", "h", "ratio", "trials", "perm_rate", "support_rate", "sign_rate",
              "mean_sweeps", "nonconverged", "wall_ms"]
DEFAULT_RATIOS = tuple(3.0 + 0.5 * i for i in range(9))


@dataclass(frozen=True)
class SweepSpec:
    n_list: Sequence[int]
    k_list: Sequence[int]
    h_list: Sequence[int]
    p: int
    design_law: str = "gauss"
    ratio_grid: Sequence[float] = DEFAULT_RATIOS
    trials: int = 50
    base_seed: int = 0
    lambda_mode: str = "constant"
    constant_lambda: float = 2.0
    scale: str = "unit-noise"
    signal_law: str = "rademacher"

    def __post_init__(self):
        for name in ("n_list", "k_list", "h_list", "ratio_grid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(b <= a for a, b in zip(self.ratio_grid, self.ratio_grid[1:])):
            raise ValueError("ratio_grid must be strictly increasing")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ValueError(f"unknown lambda mode {self.lambda_mode!r}")

    def cells(self) -> list[tuple[int, int, int, float]]:
        return [(n, k, h, r) for n in self.n_list for k in self.k_list for h in self.h_list
                for r in self.ratio_grid]

    def series(self) -> list[tuple[int, int, int]]:
        return [(n, k, h) for n in self.n_list for k in self.k_list for h in self.h_list]

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("n_list", "k_list", "h_list", "ratio_grid"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class SweepRow:
    n: int
    p: int
    k: int
    h: int
    ratio: float
    trials: int
    perm_rate: float
    support_rate: float
    sign_rate: float
    mean_sweeps: float
    nonconverged: int
    wall_ms: float


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    spec: Optional[SweepSpec] = None

    def row(self, n: int, k: int, h: int, ratio: float) -> SweepRow:
        for r in self.rows:
            if (r.n, r.k, r.h) == (n, k, h) and math.isclose(r.ratio, ratio):
                return r
        raise KeyError((n, k, h, ratio))


def trial_seed(base_seed: int, cell: int, trial: int) -> int:
    ss = np.random.SeedSequence(base_seed, spawn_key=(cell, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_trial(task):
    spec, n, k, h, ratio, seed = task
    t0 = time.perf_counter()
    gen = GenSpec(n=n, p=spec.p, k=k, h=h, design_law=spec.design_law, snr=snr_from_ratio(n, ratio),
                  signal_law=spec.signal_law, seed=seed, scale=spec.scale)
    inst = generate_instance(gen)
    res, diag = recover(inst, None, k, lambda_mode=spec.lambda_mode,
                        constant_lambda=spec.constant_lambda, with_diagnostics=True)
    elapsed = time.perf_counter() - t0
    return (res.permutation_correct, res.support_correct, res.sign_consistent, diag.sweeps,
            diag.converged, elapsed)


def resolve_jobs(jobs: Optional[int]) -> int:
    if jobs is None:
        jobs = int(os.environ.get("UNSHUFFLE_JOBS", "1"))
    return max(1, jobs)


def run_sweep(spec: SweepSpec, jobs: Optional[int] = None) -> SweepResult:
    """Run every cell of ``spec``; ``jobs`` worker processes (default ``$UNSHUFFLE_JOBS`` or 1)."""
    cells = spec.cells()
    tasks = [(spec, n, k, h, r, trial_seed(spec.base_seed, c, t))
             for c, (n, k, h, r) in enumerate(cells) for t in range(spec.trials)]
    jobs = resolve_jobs(jobs)
    if jobs == 1:
        outcomes = [_run_trial(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial, tasks, chunksize=max(1, spec.trials // 4)))

    rows = []
    for c, (n, k, h, r) in enumerate(cells):
        chunk = outcomes[c * spec.trials:(c + 1) * spec.trials]
        m = len(chunk)
        rows.append(SweepRow(
            n=n, p=spec.p, k=k, h=h, ratio=r, trials=m,
            perm_rate=sum(o[0] for o in chunk) / m,
            support_rate=sum(o[1] for o in chunk) / m,
            sign_rate=sum(o[2] for o in chunk) / m,
            mean_sweeps=sum(o[3] for o in chunk) / m,
            nonconverged=sum(not o[4] for o in chunk),
            wall_ms=1000.0 * sum(o[5] for o in chunk),
        ))
    result = SweepResult(rows, spec)
    for msg in monotonicity_flags(result):
        log.warning(msg)
    return result


def monotonicity_flags(result: SweepResult) -> list[str]:
    """Series whose permutation rate drops by more than two binomial standard errors."""
    flags = []
    series: dict[tuple, list[SweepRow]] = {}
    for r in result.rows:
        series.setdefault((r.n, r.k, r.h), []).append(r)
    for key, rows in series.items():
        for a, b in zip(rows, rows[1:]):
            band = 2.0 * math.sqrt(a.perm_rate * (1 - a.perm_rate) / a.trials)
            if b.perm_rate < a.perm_rate - band:
                flags.append(f"series n={key[0]} k={key[1]} h={key[2]}: rate fell from "
                             f"{a.perm_rate:.3f} (ratio {a.ratio}) to {b.perm_rate:.3f} (ratio {b.ratio})")
    return flags


def format_csv(result: SweepResult, timing: bool = False) -> str:
    """CSV text; ``wall_ms`` is left empty unless ``timing`` so output stays reproducible."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.rows:
        w.writerow([r.n, r.p, r.k, r.h, repr(float(r.ratio)), r.trials, f"{r.perm_rate:.6f}",
                    f"{r.support_rate:.6f}", f"{r.sign_rate:.6f}", f"{r.mean_sweeps:.3f}",
                    r.nonconverged, f"{r.wall_ms:.0f}" if timing else ""])
    return buf.getvalue()


def _write(path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(result: SweepResult, path, timing: bool = False) -> None:
    _write(path, format_csv(result, timing))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def format_plotdata(result: SweepResult) -> str:
    """gnuplot blocks (``ratio perm_rate``), one per (n, k, h) series."""
    series: dict[tuple, list[SweepRow]] = {}
    keys = result.spec.series() if result.spec is not None else []
    for key in keys:
        series[key] = []
    for r in result.rows:
        series.setdefault((r.n, r.k, r.h), []).append(r)
    blocks = []
    for (n, k, h), rows in series.items():
        lines = [f"# series n={n} k={k} h={h}"]
        lines += [f"{r.ratio!r} {r.perm_rate:.6f}" for r in sorted(rows, key=lambda r: r.ratio)]
        blocks.append("\n".join(lines) + "\n")
    return "\n\n".join(blocks)


def emit_plotdata(result: SweepResult, path) -> None:
    _write(path, format_plotdata(result))
