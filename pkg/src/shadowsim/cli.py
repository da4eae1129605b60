"""Command-line entry point.

Exit codes: 0 completed (or certificate evaluated), 2 blowup detected,
1 error or step failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import COMMANDS, parse_config
from .errors import ShadowSimError
from .runner import EXIT_ERROR, execute


def _override(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip().strip("\"'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowsim", description="Shadow-system pattern formation runs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "figure":
            p.add_argument("id", type=int, choices=(1, 2, 3, 4))
        p.add_argument("-c", "--config", type=Path, help="key = value configuration file")
        p.add_argument("-s", "--set", dest="overrides", action="append", type=_override, default=[],
                       metavar="KEY=VALUE", help="override a configuration key (repeatable)")
        p.add_argument("-o", "--out", help="output directory")
        p.add_argument("--prefix", help="output file prefix")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = [("command", args.command)]
    overrides.extend(args.overrides)
    if args.out:
        overrides.append(("output.dir", args.out))
    if args.prefix:
        overrides.append(("output.prefix", args.prefix))
    try:
        text = args.config.read_text() if args.config else ""
        if args.command == "figure":
            # the preset goes first so the file and flags can override it
            text = f"figure = {args.id}\n" + text
        spec = parse_config(text, overrides)
        outcome = execute(spec)
    except (ShadowSimError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"status: {outcome.status}")
    for key, value in outcome.summary.items():
        if key not in ("rows", "status"):
            print(f"{key}: {value}")
    for path in outcome.files:
        print(f"wrote {path}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
