"""Command-line harness.

Subcommands: generate, benchmark, sweep-latent, sweep-dataset,
latent-probe, compare, inspect. Exit codes: 0 success, 1 usage error,
2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import bench, qrdio
from .errors import ConfigError, DataFormatError, NumericError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageExit(Exception):
    def __init__(self, message):
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageExit(message)


def _add_common(parser):
    parser.add_argument("--config", help="key-value config file")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out-dir", default="qreadout-out", help="output directory")
    parser.add_argument("--tm", help="comma-separated measurement times in ns")
    parser.add_argument("--methods", help="comma-separated subset of gmm,ffnn,pretrann")
    parser.add_argument("--repeats", type=int, help="repeats per cell")
    parser.add_argument("--threads", type=int, default=1, help="parallel cells")


def build_parser() -> _Parser:
    parser = _Parser(prog="qreadout", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate shots and write QRD datasets")
    _add_common(p)

    p = sub.add_parser("benchmark", help="accuracy vs. measurement time for each method")
    _add_common(p)
    p.add_argument(
        "--fresh-data",
        action="store_true",
        help="regenerate the simulated shots for every repeat",
    )

    p = sub.add_parser("sweep-latent", help="latent-size sweep of the pretrained model")
    _add_common(p)
    p.add_argument("--fractions", help="comma-separated latent fractions in (0, 1]")
    p.add_argument("--sweep-tm", type=float, default=2400.0, help="measurement time in ns")

    p = sub.add_parser("sweep-dataset", help="dataset-size sweep of the pretrained model")
    _add_common(p)
    p.add_argument("--sizes", help="comma-separated total dataset sizes")
    p.add_argument("--sweep-tm", type=float, default=2400.0, help="measurement time in ns")

    p = sub.add_parser("latent-probe", help="vary one latent component of a saved model")
    p.add_argument("--model", required=True, help="pretrann model file")
    p.add_argument("--data", required=True, help="QRD-TRAJ dataset file")
    p.add_argument("--shot-index", type=int, required=True)
    p.add_argument("--component", type=int, required=True)
    p.add_argument(
        "--values",
        required=True,
        help="comma-separated probe values in [-1, 1]; use --values=-0.5,0,0.5 "
        "for a leading minus sign",
    )
    p.add_argument("--out", default="latent_probe.csv")

    p = sub.add_parser("compare", help="percentage-point differences between two reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out", default="compare.csv")

    p = sub.add_parser("inspect", help="print the header of a dataset or model file")
    p.add_argument("path")
    return parser


def _resolve_config(args) -> bench.ExperimentConfig:
    mapping = qrdio.load_config_file(args.config) if args.config else {}
    cfg = bench.experiment_from_mapping(mapping)
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg, sim=dataclasses.replace(cfg.sim, master_seed=args.seed)
        )
    if args.tm:
        cfg = dataclasses.replace(
            cfg, tm_list_ns=tuple(float(v) for v in args.tm.split(","))
        )
    if args.methods:
        cfg = dataclasses.replace(
            cfg, methods=tuple(m.strip() for m in args.methods.split(","))
        )
    if args.repeats is not None:
        cfg = dataclasses.replace(cfg, repeats=args.repeats)
    return cfg


def _run(args) -> int:
    if args.command == "generate":
        cfg = _resolve_config(args)
        written = bench.generate_datasets(cfg, args.out_dir)
        for path in written:
            print(path)
        return EXIT_OK
    if args.command == "benchmark":
        cfg = _resolve_config(args)
        report = bench.run_benchmark(
            cfg, args.out_dir, fresh_data=args.fresh_data, threads=args.threads
        )
        for entry in report["aggregates"]:
            print(
                f"{entry['method']:>9} tm={entry['tm_ns']:>7.0f} ns  "
                f"accuracy {entry['global_accuracy_mean']:.4f} "
                f"± {entry['global_accuracy_std']:.4f}"
            )
        if report["failures"]:
            print(f"{len(report['failures'])} cell(s) failed; see benchmark.json")
        return EXIT_OK
    if args.command == "sweep-latent":
        cfg = _resolve_config(args)
        fractions = (
            tuple(float(v) for v in args.fractions.split(","))
            if args.fractions
            else bench.DEFAULT_LATENT_FRACTIONS
        )
        rows = bench.sweep_latent(
            cfg, args.out_dir, fractions=fractions, tm_ns=args.sweep_tm,
            repeats=args.repeats,
        )
        for row in rows:
            print(
                f"fraction {float(row['fraction']):.4f}  latent {row['latent_dim']:>4}  "
                f"accuracy {float(row['accuracy_mean']):.4f}  "
                f"train {float(row['train_s_mean']):.2f} s"
            )
        return EXIT_OK
    if args.command == "sweep-dataset":
        cfg = _resolve_config(args)
        sizes = (
            tuple(int(v) for v in args.sizes.split(","))
            if args.sizes
            else bench.DEFAULT_DATASET_SIZES
        )
        rows = bench.sweep_dataset(
            cfg, args.out_dir, sizes=sizes, tm_ns=args.sweep_tm, repeats=args.repeats
        )
        for row in rows:
            print(
                f"size {row['size']:>6}  accuracy {float(row['accuracy_mean']):.4f}  "
                f"train {float(row['train_s_mean']):.2f} s"
            )
        return EXIT_OK
    if args.command == "latent-probe":
        values = [float(v) for v in args.values.split(",")]
        bench.run_latent_probe(
            args.model, args.data, args.shot_index, args.component, values, args.out
        )
        print(args.out)
        return EXIT_OK
    if args.command == "compare":
        rows = bench.compare_reports(args.report_a, args.report_b, args.out)
        for row in rows:
            if row["kind"] in ("mean_all", "mean_long", "advantage_flag_b_geq_a"):
                print(f"{row['kind']:>24} {row['method']:>14} {row['diff_pp']}")
        return EXIT_OK
    if args.command == "inspect":
        summary = qrdio.describe_file(args.path)
        print(f"{summary.kind} version {summary.version}  ({summary.path})")
        print(f"payload floats: {summary.payload_floats}  checksum ok: {summary.checksum_ok}")
        for key in sorted(summary.fields):
            print(f"  {key} = {summary.fields[key]}")
        return EXIT_OK
    raise _UsageExit(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except _UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
