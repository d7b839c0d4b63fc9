"""Command-line entry point: ``qpart partition`` and ``qpart bench``.

Exit status: 0 on success, 1 on input errors, 2 when no run produced a
feasible partition.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .graph import ChacoFormatError
from .harness import METHODS, BenchConfig, emit_report, run_benchmark

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are input errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=1.0, help="cut weight of the direct QUBO")
    p.add_argument("--beta", type=float, default=1.0, help="balance weight of the direct QUBO")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=None, help="seconds per sampler call")
    p.add_argument("--subproblem-size", type=int, default=None,
                   help="solve through the decomposer with sub-QUBOs of this size")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--tenure", type=int, default=None)
    p.add_argument("--stall-limit", type=int, default=None)
    p.add_argument("--target-samples", type=int, default=60)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--alpha0", type=float, default=None, help="initial Lagrange multiplier")
    p.add_argument("--diversity-window", type=int, default=0,
                   help="count distinct partitions with cut <= best + window")
    p.add_argument("--time-scope", choices=("sample", "total"), default="sample")
    p.add_argument("--parallel-runs", action="store_true")
    p.add_argument("--output", choices=("json", "table"), default="table")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def _config(args: argparse.Namespace) -> BenchConfig:
    return BenchConfig(
        alpha=args.alpha,
        beta=args.beta,
        seed=args.seed,
        time_limit=args.time_limit,
        subproblem_size=args.subproblem_size,
        restarts=args.restarts,
        tenure=args.tenure,
        stall_limit=args.stall_limit,
        target_samples=args.target_samples,
        workers=args.workers,
        alpha0=args.alpha0,
        diversity_window=args.diversity_window,
        time_scope=args.time_scope,
        parallel_runs=args.parallel_runs,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpart", description="Graph bipartitioning via QUBO sampling.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    part = sub.add_parser("partition", help="bipartition one Chaco graph")
    part.add_argument("--graph", type=Path, required=True)
    part.add_argument("--method", choices=sorted(METHODS), default="constrained")
    _add_run_options(part)

    bench = sub.add_parser("bench", help="run every *.graph file in a directory")
    bench.add_argument("--suite", type=Path, required=True)
    bench.add_argument("--method", choices=sorted(METHODS) + ["both"], default="both")
    _add_run_options(bench)
    return parser


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s %(message)s",
    )
    try:
        cfg = _config(args)
        if args.runs < 1:
            raise ValueError("--runs must be at least 1")
        if args.command == "partition":
            reports = [run_benchmark(str(args.graph), args.method, args.runs, cfg)]
        else:
            if not args.suite.is_dir():
                raise FileNotFoundError(f"suite directory not found: {args.suite}")
            files = sorted(args.suite.glob("*.graph"))
            if not files:
                raise FileNotFoundError(f"no *.graph files in {args.suite}")
            methods = ["qubo", "constrained"] if args.method == "both" else [args.method]
            reports = [run_benchmark(str(f), m, args.runs, cfg) for f in files for m in methods]
    except (OSError, ChacoFormatError, ValueError) as exc:
        print(f"qpart: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "partition" and args.output == "json":
        _write(reports[0].to_json(), args.out)
    else:
        _write(emit_report(reports if len(reports) > 1 else reports[0], args.output), args.out)
    return EXIT_OK if all(r.feasible for r in reports) else EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
