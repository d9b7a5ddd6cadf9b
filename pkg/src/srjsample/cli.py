"""Command line front end: ``sample``, ``bench``, ``verify`` and ``gen``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import harness
from .catalog import Instance
from .errors import SRJError

DEFAULT_HALF_EXTENT = 100.0
DEFAULT_SAMPLES = 1_000_000


def _add_inputs(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--r-file", required=required, help="R points, CSV with header id,x,y")
    p.add_argument("--s-file", required=required, help="S points, CSV with header id,x,y")
    p.add_argument("--half-extent-x", type=float, default=DEFAULT_HALF_EXTENT)
    p.add_argument("--half-extent-y", type=float, default=DEFAULT_HALF_EXTENT)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srjsample", description="Uniform sampling over spatial range joins.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw join samples and write them as r_id,s_id rows")
    _add_inputs(p)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--algo", choices=harness.ALGORITHMS, default="bbst")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", type=int, default=None, help="bucket capacity override (bbst only)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="time every phase and write a key,value report")
    _add_inputs(p)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--algo", choices=harness.ALGORITHMS, default="bbst")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--exact", action="store_true", help="also compute the exact join size by brute force")
    p.add_argument("--report", required=True)
    p.add_argument("--out", default=None, help="optionally write the samples as well")

    p = sub.add_parser("verify", help="oracle, uniformity and bound checks; exit 0 iff all pass")
    _add_inputs(p, required=False)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--alpha", type=float, default=1e-3, help="family-wise false alarm rate")

    p = sub.add_parser("gen", help="write a synthetic dataset CSV")
    p.add_argument("--kind", choices=("uniform", "gaussian_clusters"), default="uniform")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=10)
    p.add_argument("--sigma", type=float, default=200.0)
    p.add_argument("--domain", type=float, default=harness.DOMAIN)
    p.add_argument("--split", type=float, default=None,
                   help="write R and S files (OUT with _r/_s suffixes) split with this R fraction")
    p.add_argument("--out", required=True)
    return ap


def _load_pair(args):
    R = harness.load_csv(args.r_file).points
    S = harness.load_csv(args.s_file).points
    return R, S


def _echo(args, **extra) -> None:
    items = dict(half_extent_x=args.half_extent_x, half_extent_y=args.half_extent_y, **extra)
    print(" ".join(f"{k}={v}" for k, v in items.items()), file=sys.stderr)


def _cmd_sample(args) -> int:
    R, S = _load_pair(args)
    batch, _ = harness.run_algorithm(args.algo, R, S, args.half_extent_x, args.half_extent_y, args.samples,
                                     args.seed, args.capacity)
    harness.write_pairs_csv(args.out, batch.r_ids, batch.s_ids)
    if len(batch) == 0 and args.samples > 0:
        print("join is empty; wrote no samples", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    _echo(args, samples=args.samples, algo=args.algo, seed=args.seed)
    R, S = _load_pair(args)
    batch, rep = harness.run_algorithm(args.algo, R, S, args.half_extent_x, args.half_extent_y, args.samples,
                                       args.seed, args.capacity, with_exact=args.exact)
    rep.write_csv(args.report)
    if args.out:
        harness.write_pairs_csv(args.out, batch.r_ids, batch.s_ids)
    for k, v in rep.rows():
        print(f"{k:16s} {v:.6f}" if isinstance(v, float) else f"{k:16s} {v}")
    return 0


def _cmd_verify(args) -> int:
    if bool(args.r_file) != bool(args.s_file):
        print("error: --r-file and --s-file go together", file=sys.stderr)
        return 2
    if args.r_file:
        R, S = _load_pair(args)
        inst = Instance("input", R, S, args.half_extent_x, args.half_extent_y, args.capacity)
        results = [harness.verify_instance(inst, args.draws, args.seed, alpha=args.alpha)]
    else:
        results = harness.verify_catalog(draws=args.draws, seed=args.seed, alpha=args.alpha)
    worst_tv = 0.0
    for r in results:
        tv = " ".join(f"{a}={v:.4f}" for a, v in r.tv.items())
        worst_tv = max([worst_tv, *r.tv.values()])
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} |J|={r.join_size} tv[{tv}] limit={r.tv_limit:.4f}")
        for f in r.failures:
            print(f"    {f}")
    violations = sum(r.violations for r in results)
    failed = sum(not r.passed for r in results)
    print(f"instances: {len(results)} failed: {failed}")
    print(f"max tv: {worst_tv:.4f}")
    print(f"violations: {violations}")
    return 0 if failed == 0 else 1


def _cmd_gen(args) -> int:
    params = {"domain": args.domain}
    if args.kind == "gaussian_clusters":
        params.update(k=args.clusters, sigma=args.sigma)
    d = harness.generate(args.kind, args.count, params, args.seed)
    if args.split is None:
        harness.write_points_csv(args.out, d.points)
        return 0
    R, S = harness.normalize_and_split(d, args.split, args.seed)
    stem, dot, ext = args.out.rpartition(".")
    base, ext = (stem, "." + ext) if dot else (args.out, "")
    harness.write_points_csv(f"{base}_r{ext}", R)
    harness.write_points_csv(f"{base}_s{ext}", S)
    return 0


_COMMANDS = {"sample": _cmd_sample, "bench": _cmd_bench, "verify": _cmd_verify, "gen": _cmd_gen}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SRJError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
