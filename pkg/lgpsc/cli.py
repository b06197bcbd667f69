"""`bench` command line: run spec files, summarize records, list models, generate data."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .bench import BenchmarkRunner, Summary, emit_reports, read_records, render_summary, summarize
from .config import load_spec
from .data import BUILTIN_DATASETS, gen_blobs, gen_two_moons, load_builtin, parse_centers, save_delimited
from .errors import LgpscError
from .models import MODELS

logger = logging.getLogger("lgpsc")

LOG_PATH = os.getenv("LGPSC_LOG_PATH", "/tmp/lgpsc.log")
LOG_LEVEL = os.getenv("LGPSC_LOG_LEVEL", "INFO")


def _configure_logging():
    logger.setLevel(LOG_LEVEL.upper())
    formatter = logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")

    if logger.handlers:
        return
    try:
        file_handler = logging.FileHandler(LOG_PATH)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
        return
    except Exception:
        pass

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)


def cmd_run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec, seed=args.seed, output_dir=args.output_dir)
    out = Path(spec.output_dir)
    runner = BenchmarkRunner(spec=spec, output_dir=out, base_dir=Path(args.spec).resolve().parent)
    records = runner.run()
    summary = summarize(records) if records else Summary.empty()
    emit_reports(summary, out)
    print(render_summary(summary), end="")
    for err in runner.errors:
        where = "/".join(str(p) for p in (err.dataset, err.model, err.params) if p)
        print(f"error: {where}: {err.error}", file=sys.stderr)
    print(f"\n{len(records)} records written to {out} (run {runner.run_id})")
    return 0


def cmd_summarize(args: argparse.Namespace) -> int:
    records = read_records(args.records)
    summary = summarize(records, args.reduction) if records else Summary.empty(args.reduction)
    if args.output_dir:
        emit_reports(summary, args.output_dir)
    print(render_summary(summary), end="")
    return 0


def cmd_list_models(_args: argparse.Namespace) -> int:
    width = max(len(m) for m in MODELS)
    for model_id, (_fit, description) in MODELS.items():
        print(f"{model_id.ljust(width)}  {description}")
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    if args.generator == "moons":
        dataset = gen_two_moons(args.n, args.noise, args.seed)
    elif args.generator == "blobs":
        dataset = gen_blobs(parse_centers(args.centers), args.points_per, args.stddev, args.seed)
    else:
        dataset = load_builtin(args.generator)
    save_delimited(dataset, args.out)
    print(f"wrote {dataset.n} points ({dataset.m} features, {dataset.d_true} classes) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Benchmark spectral clustering models")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    run_parser = subparsers.add_parser("run", help="Run a benchmark spec file (TOML)")
    run_parser.add_argument("spec", help="Spec file")
    run_parser.add_argument("--output-dir", help="Override the spec's output directory")
    run_parser.add_argument("--seed", type=int, help="Override the spec's base seed")
    run_parser.set_defaults(func=cmd_run)

    sum_parser = subparsers.add_parser("summarize", help="Summarize a records.csv file")
    sum_parser.add_argument("records", help="records.csv from a previous run")
    sum_parser.add_argument("--reduction", choices=["best", "mean"], default="best")
    sum_parser.add_argument("--output-dir", help="Also write summary files here")
    sum_parser.set_defaults(func=cmd_summarize)

    list_parser = subparsers.add_parser("list-models", help="List model ids")
    list_parser.set_defaults(func=cmd_list_models)

    gen_parser = subparsers.add_parser("gen", help="Write a dataset to a delimited file")
    gen_sub = gen_parser.add_subparsers(dest="generator", required=True)

    moons = gen_sub.add_parser("moons", help="Two interleaved half-circles")
    moons.add_argument("--n", type=int, default=200, help="Total points (even)")
    moons.add_argument("--noise", type=float, default=0.05)
    moons.add_argument("--seed", type=int, default=0)

    blobs = gen_sub.add_parser("blobs", help="Isotropic Gaussian blobs")
    blobs.add_argument("--centers", required=True, help="Centers as 'x,y;x,y;...'")
    blobs.add_argument("--points-per", type=int, default=50)
    blobs.add_argument("--stddev", type=float, default=1.0)
    blobs.add_argument("--seed", type=int, default=0)

    for name in BUILTIN_DATASETS:
        gen_sub.add_parser(name, help=f"Export the bundled {name} dataset")

    for sub in gen_sub.choices.values():
        sub.add_argument("-o", "--out", required=True, help="Output file")
    gen_parser.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 2

    _configure_logging()
    try:
        return args.func(args)
    except (LgpscError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
