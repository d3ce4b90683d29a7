"""Command-line interface.

Subcommands:
    prepare <dataset> --in <raw paths> --out <jsonl>
    train --config <file>            one (body, head, dataset) cell
    grid --config <file> [--workers N] [--resume | --fresh]
    report --grid <dir> --tables results,improvement,winners --format md|csv
    config --dump-defaults

Exit codes: 0 success, 1 usage error, 2 data-integrity error,
3 diverged/failed cells present.
"""

import argparse
import sys

from . import __version__
from .config import dump_defaults, load_config
from .data import export_jsonl, load_dataset
from .errors import (DivergedError, IntegrityError, InvalidConfigError,
                     ParseError, RnnBenchError)
from .report import TABLE_KINDS, ResultsGrid, write_report
from .runner import failed_cells, run_grid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRITY = 2
EXIT_FAILED_CELLS = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rnnbench",
                     description="LSTM/BLSTM sentence-classification benchmark")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="convert a raw dataset to JSONL")
    p.add_argument("dataset", help="MR, SST-1, SST-2, TREC, Subj, or CR")
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   metavar="RAW", help="raw files in the adapter's order")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--no-check", action="store_true",
                   help="skip the published-statistics integrity gate")

    p = sub.add_parser("train", help="train a single grid cell")
    p.add_argument("--config", required=True)

    p = sub.add_parser("grid", help="run the experiment grid")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--resume", action="store_true", default=True,
                   help="reuse completed cells (default)")
    p.add_argument("--fresh", action="store_true",
                   help="ignore completed cells and retrain everything")

    p = sub.add_parser("report", help="render tables and figures from a grid")
    p.add_argument("--grid", required=True, help="grid output directory")
    p.add_argument("--tables", default=",".join(TABLE_KINDS),
                   help=f"comma list of {', '.join(TABLE_KINDS)}")
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--out", default=None,
                   help="report directory (default <grid>/report)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip the PNG renderings")

    p = sub.add_parser("config", help="configuration helpers")
    p.add_argument("--dump-defaults", action="store_true")

    return parser


def _cmd_prepare(args) -> int:
    corpus = load_dataset(args.dataset, args.inputs,
                          check_integrity=not args.no_check)
    export_jsonl(corpus, args.out)
    report = corpus.load_report
    extras = "".join(
        f", {v} {k.replace('_', ' ')}" for k, v in sorted(report.items()) if v)
    print(f"{corpus.name}: wrote {len(corpus)} examples "
          f"({corpus.classes} classes) to {args.out}{extras}")
    return EXIT_OK


def _cmd_train(args) -> int:
    spec = load_config(args.config)
    if len(spec.datasets) != 1 or len(spec.bodies) != 1 or len(spec.heads) != 1:
        raise InvalidConfigError(
            "train runs one cell: config must select exactly one dataset, "
            "one body, and one head (use `grid` for more)")
    results = run_grid(spec, resume=True)
    return EXIT_FAILED_CELLS if failed_cells(results) else EXIT_OK


def _cmd_grid(args) -> int:
    spec = load_config(args.config)
    if args.workers is not None:
        spec.workers = args.workers
    results = run_grid(spec, resume=not args.fresh)
    failed = failed_cells(results)
    if failed:
        print(f"{len(failed)} cell(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILED_CELLS
    print(f"grid complete: {len(results)} cells in {spec.out_dir}")
    return EXIT_OK


def _cmd_report(args) -> int:
    tables = [t.strip() for t in args.tables.split(",") if t.strip()]
    grid = ResultsGrid.from_dir(args.grid)
    out_dir = args.out or f"{args.grid.rstrip('/')}/report"
    written = write_report(grid, out_dir, tables=tables, fmt=args.format,
                           figures=not args.no_figures)
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_config(args) -> int:
    if args.dump_defaults:
        sys.stdout.write(dump_defaults())
        return EXIT_OK
    raise InvalidConfigError("nothing to do; try --dump-defaults")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"prepare": _cmd_prepare, "train": _cmd_train,
                "grid": _cmd_grid, "report": _cmd_report, "config": _cmd_config}
    try:
        return handlers[args.command](args)
    except (IntegrityError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except DivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED_CELLS
    except (InvalidConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RnnBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
