#!/usr/bin/env python3
"""Minimum snr ratio log snr / log n below which exact recovery is provably impossible.

Tabulates the lower-bound threshold for the simulation geometries next to the
rate and capacity at that point.
"""

import math

from unshuffle.bounds import BoundQuery, capacity, exact_threshold_snr, rate

GEOMETRIES = [(180, 500, 5), (180, 500, 20), (200, 500, 10), (220, 500, 20), (120, 600, 5), (150, 600, 5)]

print(f"{'n':>5}{'p':>6}{'k':>4}  {'snr*':>12}  {'ratio*':>8}  {'rate':>8}  {'capacity':>8}")
for n, p, k in GEOMETRIES:
    snr = exact_threshold_snr(n, p, k)
    q = BoundQuery(n, p, k, snr=max(snr, 0.0))
    ratio = math.log(snr) / math.log(n) if snr > 0 else float("nan")
    print(f"{n:>5}{p:>6}{k:>4}  {snr:>12.5g}  {ratio:>8.4f}  {rate(q):>8.4f}  {capacity(q):>8.4f}")
