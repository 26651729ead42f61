"""Command-line entry point.

    speckledge simulate [--config FILE] [--seed N] [--out DIR] [--verbose]
    speckledge run      [--config FILE] [--seed N] [--jobs N] [--out DIR] [--verbose]
    speckledge report FILE [FILE ...]   [--out DIR] [--verbose]

Without --config, a built-in benchmark configuration is used (128x128
four-class striped mosaic, three channels, twenty repetitions).  --seed and
--out override the config file's master_seed and output directory.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ExperimentConfig, config_from_text, load_config
from .pipeline import cmd_report, cmd_run, cmd_simulate
from .report import ReportFormatError, summary_table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speckledge",
        description="Benchmark speckle-aware edge detectors on simulated "
        "multi-look amplitude mosaics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_config: bool) -> None:
        if with_config:
            p.add_argument("--config", metavar="FILE", help="configuration file")
            p.add_argument("--seed", type=int, metavar="N", help="override master_seed")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--verbose", action="store_true", help="chatty logging")

    p_sim = sub.add_parser("simulate", help="write simulated mosaics and ground truth")
    add_common(p_sim, with_config=True)

    p_run = sub.add_parser("run", help="run the benchmark and write the report CSV")
    add_common(p_run, with_config=True)
    p_run.add_argument(
        "--jobs", type=int, default=1, metavar="N", help="worker threads (default 1)"
    )

    p_rep = sub.add_parser("report", help="merge report CSVs, render summary and figure")
    p_rep.add_argument("files", nargs="+", metavar="FILE", help="report CSV files")
    add_common(p_rep, with_config=False)

    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is None:
        return config_from_text(
            "", source="<defaults>", seed_override=args.seed, out_override=args.out
        )
    return load_config(args.config, seed_override=args.seed, out_override=args.out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if not args.verbose:
        logging.getLogger("speckledge").setLevel(logging.WARNING)

    try:
        if args.command == "simulate":
            written = cmd_simulate(_load(args))
            print(f"wrote {len(written)} files")
            return 0
        if args.command == "run":
            if args.jobs < 1:
                print("error: --jobs must be >= 1", file=sys.stderr)
                return 2
            rows, csv_path = cmd_run(_load(args), jobs=args.jobs)
            print(summary_table(rows), end="")
            print(f"report: {csv_path}")
            return 0
        merged, summary = cmd_report(args.files, args.out or "out")
        print(summary, end="")
        return 0
    except (ConfigError, ReportFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
