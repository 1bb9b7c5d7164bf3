"""qfreq command line: run | theory | gen | verify.

Exit status: 0 on success, 2 on invalid input or a failed verification,
1 on any other runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..core import StreamError, write_stream
from .experiment import ConfigError, load_config, rows_to_csv, run_experiment, success_rate, write_csv
from .generators import GeneratorError, generate_instance
from .theory import UnknownCurve, parse_grid, theory_table
from .verify import run_suite

log = logging.getLogger("qfreq")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _key_values(pairs: list[str]) -> dict[str, str]:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    rows = run_experiment(cfg)
    out = args.out or cfg.output
    if out is None:
        sys.stdout.write(rows_to_csv(rows))
    else:
        write_csv(rows, out)
        log.info("wrote %d rows to %s", len(rows), out)
    log.info("success rate %.3f over %d trials", success_rate(rows), len(rows))
    return EXIT_OK


def cmd_theory(args) -> int:
    table = theory_table(args.curve, parse_grid(args.grid))
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_gen(args) -> int:
    stream = generate_instance(args.name, _key_values(args.params), args.seed)
    write_stream(stream, args.out)
    log.info("wrote n=%d m=%d to %s", stream.n, stream.m, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    failed = sum(not ok for _, ok, _ in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfreq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config and emit CSV")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, help="override the config's output path")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("theory", help="tabulate order-of-growth curves")
    p.add_argument("curve", nargs="+", help="curve id(s) from the catalogue")
    p.add_argument("--grid", nargs="+", default=[], metavar="KEY=V1,V2", help="keys: n m k eps")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("gen", help="write a generated instance as a stream file")
    p.add_argument("name")
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="run enumeration/property suites")
    p.add_argument("suite", nargs="?", default="all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        return args.func(args)
    except (ConfigError, GeneratorError, UnknownCurve, StreamError, ValueError, KeyError) as exc:
        print(f"qfreq: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"qfreq: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
