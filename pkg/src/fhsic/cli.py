"""Command line front end: ``fhsic test | simulate | diagnose``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import FhsicError
from .hsic import (
    DEFAULT_GAMMA,
    DEFAULT_SIGNIFICANCE,
    WeightScheme,
    independence_test,
    naive_hsic,
    permutation_test_naive,
)
from .io import ingest_curves
from .kernels import DEFAULT_KERNEL_COEFF, KernelSpec, gram_matrix
from .simulation import (
    PAPER_M_GRID,
    ScenarioConfig,
    format_table,
    normalize_link,
    null_z_diagnostic,
    run_study,
    write_records,
)


class UsageError(FhsicError):
    """Invalid combination of command line values."""


def _scenario(args, **kw):
    try:
        return ScenarioConfig(n=args.n, grid_points=args.grid_points, replicates=args.reps,
                              master_seed=args.seed, **kw)
    except FhsicError as exc:
        raise UsageError(str(exc)) from exc


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def _gamma(text):
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"gamma must lie in (0, 1], got {text}")
    return value


def _open_unit(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _m_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError(f"expected nonnegative integers, got {text!r}")
    return values


def _link(text):
    try:
        return normalize_link(text)
    except FhsicError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _common(p):
    p.add_argument("--gamma", type=_gamma, default=DEFAULT_GAMMA,
                   help="weight amplitude in (0, 1] (default %(default)s)")
    p.add_argument("--kernel-coeff", type=_positive_float, default=DEFAULT_KERNEL_COEFF,
                   help="multiplier of the squared L2 distance in the Gaussian kernel "
                        "(default 1/150)")
    p.add_argument("--alpha", type=_open_unit, default=DEFAULT_SIGNIFICANCE,
                   help="significance level (default %(default)s)")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", type=Path, help="write machine-readable records (JSON lines)")


def _scenario_args(p, m_default):
    p.add_argument("--n", type=int, default=100, help="sample size (default %(default)s)")
    p.add_argument("--reps", type=_positive_int, default=300,
                   help="Monte Carlo replicates (default %(default)s)")
    p.add_argument("--grid-points", type=int, default=51)
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes; results do not depend on this")
    if m_default is not None:
        p.add_argument("--m", type=_m_list, default=list(m_default),
                       help="comma-separated dependence orders (default 0,1,3,5,10)")
        p.add_argument("--link", type=_link, action="append",
                       help="cube, square or square-sin; repeatable (default cube)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fhsic", description="Modified HSIC independence tests for functional data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test independence of two curve samples")
    p.add_argument("--x", type=Path, required=True, help="CSV of X curves, one per row")
    p.add_argument("--y", type=Path, required=True, help="CSV of Y curves, one per row")
    p.add_argument("--permutations", type=_nonneg_int, default=0,
                   help="also run the naive-HSIC permutation baseline")
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo size/power table")
    _scenario_args(p, PAPER_M_GRID)
    p.add_argument("--permutations", type=_nonneg_int, default=0,
                   help="permutations for the baseline; 0 skips it (paper used 50)")
    _common(p)

    p = sub.add_parser("diagnose", help="null z-score normality diagnostic")
    _scenario_args(p, None)
    p.add_argument("--link", type=_link, default="cube")
    _common(p)
    return parser


def _fmt(value):
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.10g}"
    return str(value)


def cmd_test(args, out=None) -> int:
    out = out or sys.stdout
    x = ingest_curves(args.x)
    y = ingest_curves(args.y)
    if x.n != y.n:
        raise FhsicError(f"{args.x} has {x.n} curves but {args.y} has {y.n}")
    kernel = KernelSpec(args.kernel_coeff)
    K = gram_matrix(x, kernel)
    L = gram_matrix(y, kernel)
    res = independence_test(K, L, WeightScheme(args.gamma), args.alpha)
    record = res.as_dict()
    record["kernel_coeff"] = kernel.bandwidth_coefficient
    lines = [
        f"n                 {res.n}",
        f"gamma             {_fmt(res.gamma)}",
        f"kernel coeff      {_fmt(kernel.bandwidth_coefficient)}",
        f"statistic         {_fmt(res.statistic)}",
        f"alpha_hat         {_fmt(res.alpha_hat)}",
        f"sigma^2           {_fmt(res.sigma_sq_hat)}",
        f"z                 {_fmt(res.z_score)}",
        f"p-value           {_fmt(res.p_value)}",
        f"critical value    {_fmt(res.critical_value)}",
        f"threshold         {_fmt(res.threshold)}  (reject if statistic > threshold)",
        f"significance      {_fmt(res.significance)}",
    ]
    if res.degenerate:
        lines.append("degenerate        yes (zero variance estimate; not rejecting)")
    if args.permutations:
        p_perm = permutation_test_naive(K, L, args.permutations, args.seed)
        record.update(permutations=args.permutations, permutation_p=p_perm,
                      naive_statistic=naive_hsic(K, L).value)
        lines.append(f"permutation p     {_fmt(p_perm)}  ({args.permutations} permutations)")
    decision = "reject independence" if res.reject else "do not reject independence"
    lines.append(f"decision          {decision}")
    out.write("\n".join(lines) + "\n")
    if args.out:
        if math.isnan(record["z_score"]):
            record["z_score"] = None
        args.out.write_text(json.dumps(record, sort_keys=True) + "\n")
    return 0


def cmd_simulate(args, out=None) -> int:
    out = out or sys.stdout
    links = args.link or ["cube"]
    tests = ["mhsic"] + (["permutation"] if args.permutations else [])
    kernel = KernelSpec(args.kernel_coeff)
    results = []
    for link in links:
        for test in tests:
            for m in args.m:
                cfg = _scenario(args, m=m, link=link)
                results.append(run_study(cfg, test, args.gamma, kernel, args.alpha,
                                         permutations=args.permutations or 50,
                                         workers=args.workers))
    out.write(f"Rejection rates: n={args.n}, replicates={args.reps}, gamma={args.gamma:g}, "
              f"kernel coeff={kernel.bandwidth_coefficient:.10g}, alpha={args.alpha:g}, "
              f"seed={args.seed}\n")
    out.write(format_table(results))
    if args.out:
        with args.out.open("w") as fh:
            write_records(results, fh)
    return 0


def cmd_diagnose(args, out=None) -> int:
    out = out or sys.stdout
    cfg = _scenario(args, m=0, link=args.link)
    diag = null_z_diagnostic(cfg, args.gamma, KernelSpec(args.kernel_coeff),
                             workers=args.workers)
    out.write(f"null z-scores: n={args.n}, replicates={args.reps}, gamma={args.gamma:g}, "
              f"kernel coeff={args.kernel_coeff:.10g}, seed={args.seed}\n")
    out.write(f"used          {diag.used}\n")
    out.write(f"degenerate    {diag.degenerate}\n")
    out.write(f"mean          {_fmt(diag.mean)}\n")
    out.write(f"variance      {_fmt(diag.variance)}\n")
    out.write(f"KS distance   {_fmt(diag.ks_distance)}\n")
    if args.out:
        with args.out.open("w") as fh:
            for i, z in enumerate(diag.z_scores):
                fh.write(json.dumps({"index": i, "z": z}) + "\n")
    return 0


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fhsic: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"fhsic: error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (FhsicError, OSError) as exc:
        print(f"fhsic: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
