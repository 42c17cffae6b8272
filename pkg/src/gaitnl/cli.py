"""Batch command line: expand files x columns x algorithms and run them.

Exit codes: 0 when every task is ok or skipped (skips are warnings), 1 when
any task failed, 2 on batch-level errors (unreadable attribute list,
unwritable output directory, nothing runnable, bad arguments).
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import GaitnlError
from .pipeline import (
    WORKERS_ENV_VAR,
    AlgorithmRequest,
    BatchJob,
    algorithm_names,
    registered_algorithms,
    run_batch,
)


def _parse_value(raw: str):
    lowered = raw.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _parse_param(raw: str) -> tuple[str, str, object]:
    head, sep, value = raw.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(
            f"--param expects <algo>.<key>=<value>, got {raw!r}"
        )
    algo, dot, key = head.partition(".")
    if not dot or not algo or not key:
        raise argparse.ArgumentTypeError(
            f"--param expects <algo>.<key>=<value>, got {raw!r}"
        )
    return algo, key, _parse_value(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="analyze",
        description="Run nonlinear analysis algorithms over dataset columns.",
    )
    parser.add_argument("--data", nargs="+", default=[],
                        help="input CSV/Parquet files")
    parser.add_argument("--attributes",
                        help="text file listing one column name per line")
    parser.add_argument("--algorithms", default="all",
                        help="comma-separated algorithm names, or 'all'")
    parser.add_argument("--param", action="append", default=[],
                        metavar="ALGO.KEY=VALUE",
                        help="override one algorithm parameter (repeatable)")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker count (default ${WORKERS_ENV_VAR} or 1)")
    parser.add_argument("--memory-budget", type=int, default=None,
                        metavar="BYTES",
                        help="memory budget; default 75%% of system memory")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--plots", action="store_true",
                        help="emit plot artifacts for ok tasks")
    parser.add_argument("--sample-rate-hz", type=float, default=None,
                        help="sample rate attached to every column")
    parser.add_argument("--drop-leading-trailing-nan", action="store_true",
                        help="trim contiguous non-finite prefixes/suffixes")
    parser.add_argument("--list-algorithms", action="store_true",
                        help="list registered algorithms and exit")
    return parser


def _list_algorithms() -> None:
    for spec in registered_algorithms():
        keys = ", ".join(f"{k}={v}" for k, v in spec.schema.items())
        print(f"{spec.name}: {keys}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_algorithms:
        _list_algorithms()
        return 0

    if not args.data or not args.attributes:
        parser.print_usage(sys.stderr)
        print("error: --data and --attributes are required", file=sys.stderr)
        return 2

    if args.workers is not None:
        workers = args.workers
    else:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))

    if args.algorithms.strip() == "all":
        names = algorithm_names()
    else:
        names = [n.strip() for n in args.algorithms.split(",") if n.strip()]

    overrides: dict[str, dict] = {}
    try:
        for raw in args.param:
            algo, key, value = _parse_param(raw)
            overrides.setdefault(algo, {})[key] = value
    except argparse.ArgumentTypeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    unknown = set(overrides) - set(names)
    if unknown:
        print(
            f"error: --param given for algorithms not selected: {sorted(unknown)}",
            file=sys.stderr,
        )
        return 2

    try:
        job = BatchJob(
            dataset_paths=args.data,
            attribute_list_path=args.attributes,
            algorithms=[AlgorithmRequest(n, overrides.get(n, {})) for n in names],
            workers=max(1, workers),
            memory_budget_bytes=args.memory_budget,
            output_dir=args.out,
            emit_plots=args.plots,
            drop_leading_trailing_nan=args.drop_leading_trailing_nan,
            sample_rate_hz=args.sample_rate_hz,
        )
        summary = run_batch(job)
    except (GaitnlError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    print(
        f"tasks: {summary.tasks_ok} ok, {summary.tasks_skipped} skipped, "
        f"{summary.tasks_failed} failed"
    )
    if summary.tasks_skipped:
        print(
            f"warning: {summary.tasks_skipped} task(s) skipped; "
            "see results_summary.csv for reasons",
            file=sys.stderr,
        )
    for p in summary.report_paths:
        print(f"wrote {p}")
    return 1 if summary.tasks_failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
