"""Command-line entry point: ``unshuffle <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import bounds as bnd
from .datagen import GenSpec, generate_instance, snr_from_ratio
from .harness import SweepSpec, emit_plotdata, run_sweep, write_csv
from .model import ProblemInstance, load_json, save_json
from .oracle import InstanceTooLarge, ml_estimate
from .recovery import recover
from .solver import SolverConfig, robust_lasso


def _emit(obj, out) -> None:
    if out:
        save_json(obj, out)
    else:
        print(json.dumps(obj.to_dict() if hasattr(obj, "to_dict") else obj))


def _load_instance(path) -> ProblemInstance:
    return ProblemInstance.from_dict(load_json(path))


def cmd_generate(a):
    if a.snr is not None:
        snr = a.snr
    elif a.snr_ratio is not None:
        snr = snr_from_ratio(a.n, a.snr_ratio)
    else:
        snr = math.inf
    spec = GenSpec(n=a.n, p=a.p, k=a.k, h=a.h, design_law=a.design, snr=snr, signal_law=a.signal_law,
                   seed=a.seed, scale=a.scale)
    _emit(generate_instance(spec), a.out)


def cmd_solve(a):
    inst = _load_instance(a.inp)
    cfg = SolverConfig(lambda_beta=a.lambda_beta, lambda_xi=a.lambda_xi, tol=a.tol,
                       max_sweeps=a.max_sweeps)
    _emit(robust_lasso(inst, cfg), a.out)


def cmd_recover(a):
    inst = _load_instance(a.inp)
    _emit(recover(inst, None, a.k, lambda_mode=a.lambda_mode, constant_lambda=a.constant_lambda), a.out)


def cmd_ml(a):
    inst = _load_instance(a.inp)
    try:
        perm, signal, obj = ml_estimate(inst, a.k, return_objective=True)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit({"permutation": perm.to_dict(), "signal_estimate": signal.to_dict(), "objective": obj}, a.out)


def cmd_bounds(a):
    q = bnd.BoundQuery(n=a.n, p=a.p, k=a.k, snr=a.snr, D=a.D)
    s = bnd.summary(q)
    print(f"ln zeta                     {s['log_zeta']:.12g}")
    print(f"rate     ln(n! C(p,k))/n    {s['rate']:.12g}")
    print(f"capacity 0.5 ln(1+snr)      {s['capacity']:.12g}")
    print(f"rate > capacity             {s['rate_exceeds_capacity']}")
    print(f"exact threshold snr         {s['exact_threshold_snr']:.12g}")
    print(f"exact recovery infeasible   {s['exact_recovery_infeasible']}")
    print(f"approx recovery infeasible  {s['approx_recovery_infeasible']}")


def cmd_sweep(a):
    spec = SweepSpec.load(a.config)
    result = run_sweep(spec, jobs=a.jobs)
    if a.csv:
        write_csv(result, a.csv, timing=a.timing)
    if a.plotdata:
        emit_plotdata(result, a.plotdata)
    if not a.csv and not a.plotdata:
        from .harness import format_csv
        sys.stdout.write(format_csv(result, timing=a.timing))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unshuffle", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw a synthetic shuffled instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--h", type=int, default=0)
    g.add_argument("--snr-ratio", type=float, help="log snr / log n (default: noiseless)")
    g.add_argument("--snr", type=float, help="absolute snr (overrides --snr-ratio)")
    g.add_argument("--design", choices=["gauss", "unif"], default="gauss")
    g.add_argument("--signal-law", choices=["rademacher", "unit"], default="rademacher")
    g.add_argument("--scale", choices=["unit-noise", "unit-signal"], default="unit-noise")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="robust Lasso fit of an instance")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--lambda-beta", type=float, default=2.0)
    s.add_argument("--lambda-xi", type=float, default=2.0)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-sweeps", type=int, default=10000)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("recover", help="two-stage permutation and support recovery")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--lambda-mode", choices=["theory", "constant"], default="constant")
    r.add_argument("--constant-lambda", type=float, default=2.0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_recover)

    m = sub.add_parser("ml", help="exhaustive maximum-likelihood estimate (tiny instances)")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--out")
    m.set_defaults(func=cmd_ml)

    b = sub.add_parser("bounds", help="information-theoretic thresholds")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--snr", type=float, required=True)
    b.add_argument("--D", type=int, default=0)
    b.set_defaults(func=cmd_bounds)

    w = sub.add_parser("sweep", help="Monte Carlo phase-transition sweep")
    w.add_argument("--config", required=True, help="JSON-serialized SweepSpec")
    w.add_argument("--csv")
    w.add_argument("--plotdata")
    w.add_argument("--jobs", type=int, help="worker processes (default $UNSHUFFLE_JOBS or 1)")
    w.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
