"""Command-line entry point.

Exit codes: 0 when every assertion row passes, 1 when any row is FAIL,
2 for invalid invocations or configs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, parse_config
from .experiments import SUITES, default_threads

log = logging.getLogger("semigibbs")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file (defaults if omitted)")
    parser.add_argument("--out", metavar="DIR", default="results", help="output directory")
    parser.add_argument("--threads", type=int, metavar="K", default=None,
                        help="worker threads (default: $SEMIGIBBS_THREADS or logical cores)")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key; VALUE is JSON, dots address nested keys")
    parser.add_argument("--svg", action="store_true", help="also write an SVG plot")
    parser.add_argument("--verbose", "-v", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semigibbs",
                                     description="Classical limits of quantum Gibbs states at desk scale.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUITES:
        _common(sub.add_parser(name, help=f"run the {name} suite"))
    check = sub.add_parser("selfcheck", help="run the built-in assertion battery")
    check.add_argument("--verbose", "-v", action="store_true")
    sub.add_parser("version", help="print the version")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "version":
        print(__version__)
        return 0
    if args.command == "selfcheck":
        from .selfcheck import run_selfcheck
        return 0 if run_selfcheck(verbose=args.verbose) else 1

    text = ""
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config {path}: {exc.strerror}", file=sys.stderr)
            return 2
    try:
        config = parse_config(text, args.command, args.override)
    except ConfigError as exc:
        where = args.config or "<defaults>"
        print(f"error: invalid config {where}: {exc}", file=sys.stderr)
        return 2
    threads = args.threads if args.threads is not None else default_threads()
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2

    log.info("running %s (config %s, %d threads)", args.command, config.hash[:12], threads)
    table = SUITES[args.command](config.as_run_dict(), threads)
    table.metadata["config"] = config.params

    from .output import write_outputs
    for p in write_outputs(table, args.out, svg=args.svg):
        log.info("wrote %s", p)
    for row in table.failures:
        print(f"FAIL {row.get('check')}: {row.get('detail', '')}", file=sys.stderr)
    n_checks = sum(1 for r in table.rows if r["row_type"] == "check")
    print(f"{args.command}: {n_checks - len(table.failures)}/{n_checks} checks passed -> {args.out}")
    return 0 if table.ok else 1


if __name__ == "__main__":
    sys.exit(main())
