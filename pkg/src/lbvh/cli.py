"""Command-line harness: generate | bench | scale | verify.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 verification mismatch.
Benchmark output is CSV on stdout (one row per run) unless --format pretty.
"""

from __future__ import annotations

import argparse
import sys

from .bench import (
    CSV_HEADER,
    SCALE_CSV_HEADER,
    BenchConfig,
    run_bench,
    run_scale,
    run_verify,
)
from .datasets import CloudSpec, generate, save_cloud

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; the harness contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, with_reps: bool) -> None:
    p.add_argument("--source", default="cube:filled", metavar="SHAPE:VARIANT",
                   help="indexed cloud (default cube:filled)")
    p.add_argument("--target", default="sphere:filled", metavar="SHAPE:VARIANT",
                   help="query cloud (default sphere:filled)")
    p.add_argument("--m", type=int, default=10_000, help="source point count")
    p.add_argument("--n", type=int, default=None,
                   help="target point count (default: same as --m)")
    p.add_argument("--k", type=int, default=10, help="neighbors for kNN (default 10)")
    p.add_argument("--radius", type=float, default=None,
                   help="spatial radius (default: calibrated for k mean neighbors)")
    p.add_argument("--kind", choices=("spatial", "knn"), default="spatial")
    p.add_argument("--alloc", choices=("1p", "2p"), default=None,
                   help="spatial allocation strategy (default 2p)")
    p.add_argument("--buffer-size", type=int, default=None,
                   help="per-query preallocation, required with --alloc 1p")
    p.add_argument("--sort-queries", choices=("on", "off"), default="on",
                   help="Morton pre-sorting of the query batch (default on)")
    p.add_argument("--seed", type=int, default=0)
    if with_reps:
        p.add_argument("--reps", type=int, default=5,
                       help="timed repetitions, median reported (default 5)")
        p.add_argument("--format", choices=("csv", "pretty"), default="csv")


def _build_parser() -> _Parser:
    parser = _Parser(prog="lbvh",
                     description="Linear BVH neighbor-search benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[], help="write a synthetic cloud file")
    gen.add_argument("--source", default="cube:filled", metavar="SHAPE:VARIANT")
    gen.add_argument("--m", type=int, required=True, help="point count")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("output", help="output path (.csv for text, else PCL3 binary)")

    bench = sub.add_parser("bench", help="time build and query phases")
    _add_common(bench, with_reps=True)
    bench.add_argument("--threads", type=int, default=1)

    scale = sub.add_parser("scale", help="bench across a list of thread counts")
    _add_common(scale, with_reps=True)
    scale.add_argument("--threads", default="1", metavar="T1,T2,...",
                       help="comma-separated thread counts (default 1)")

    verify = sub.add_parser("verify", help="compare against the brute-force oracle")
    _add_common(verify, with_reps=False)
    verify.add_argument("--threads", type=int, default=1)
    verify.add_argument("--corrupt-tree", action="store_true",
                        help=argparse.SUPPRESS)  # test hook
    return parser


def _config_from(args: argparse.Namespace, threads: int, reps: int = 1) -> BenchConfig:
    return BenchConfig(
        source=args.source,
        target=args.target,
        m=args.m,
        n=args.n,
        k=args.k,
        radius=args.radius,
        kind=args.kind,
        alloc=args.alloc,
        buffer_size=args.buffer_size,
        sort_queries=args.sort_queries == "on",
        threads=threads,
        seed=args.seed,
        reps=reps,
    )


def _cmd_generate(args) -> int:
    spec = CloudSpec.parse(args.source, args.m, args.seed)
    save_cloud(args.output, generate(spec))
    return EXIT_OK


def _cmd_bench(args) -> int:
    report = run_bench(_config_from(args, args.threads, args.reps))
    if args.format == "pretty":
        print(report.pretty())
    else:
        print(CSV_HEADER)
        print(report.csv_row())
    return EXIT_OK


def _cmd_scale(args) -> int:
    try:
        thread_list = [int(t) for t in str(args.threads).split(",") if t != ""]
    except ValueError:
        raise ValueError(f"--threads must be a comma-separated integer list, "
                         f"got {args.threads!r}") from None
    rows = run_scale(_config_from(args, 1, args.reps), thread_list)
    if args.format == "pretty":
        for report, bs, qs in rows:
            print(report.pretty())
            print(f"speedup:  build x{bs:.2f}  query x{qs:.2f}")
            print()
    else:
        print(SCALE_CSV_HEADER)
        for report, bs, qs in rows:
            print(f"{report.csv_row()},{bs:.2f},{qs:.2f}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    result = run_verify(_config_from(args, args.threads),
                        corrupt_tree=args.corrupt_tree)
    print(f"verified {result.total} queries, {result.mismatches} mismatched")
    if result.ok:
        return EXIT_OK
    for line in result.diffs:
        print(line, file=sys.stderr)
    return EXIT_VERIFY


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "bench": _cmd_bench,
        "scale": _cmd_scale,
        "verify": _cmd_verify,
    }[args.command]
    try:
        return handler(args)
    except ValueError as exc:
        print(f"lbvh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lbvh: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
