"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 input error (bad JSON,
schema violation, unsupported data), 3 dimension limit exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .commands import cmd_beurling, cmd_factor, cmd_selftest, cmd_verify
from .config import (
    MAX_DIM_ENV,
    DimensionLimitError,
    InputError,
    RunConfig,
    max_dimension,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3

COMMANDS = {"verify": cmd_verify, "factor": cmd_factor, "beurling": cmd_beurling}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardy-modules",
        description="Verify, factor and represent doubly commuting quotient modules of H^2 on the polydisc.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", metavar="PATH", help="write the certificate here instead of stdout")
    common.add_argument("--truncation", type=int, metavar="N", help="per-variable Taylor degree (overrides the input)")
    common.add_argument("--tol-dc", type=float, default=RunConfig.tol_dc, help="doubly commuting tolerance")
    common.add_argument("--tol-rank", type=float, default=RunConfig.tol_rank, help="relative rank threshold")
    common.add_argument("--tol-fact", type=float, default=RunConfig.tol_fact, help="factorization tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument(
        "--max-dim", type=int, metavar="M", help=f"maximum dense dimension (default: ${MAX_DIM_ENV} or 20000)"
    )
    common.add_argument("--summary", action="store_true", help="also print a human-readable summary to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("verify", "run the identity checks appropriate to the input"),
        ("factor", "factor a quotient module into one-variable model spaces"),
        ("beurling", "Beurling-type round trip between a submodule and its quotient"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--input", required=True, metavar="PATH", help="problem description (JSON)")
    sub.add_parser("selftest", parents=[common], help="randomized invariant suites")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            truncation=args.truncation,
            tol_rank=args.tol_rank,
            tol_dc=args.tol_dc,
            tol_fact=args.tol_fact,
            max_dimension=args.max_dim if args.max_dim is not None else max_dimension(),
            seed=args.seed,
        )
        if args.command == "selftest":
            cert = cmd_selftest(config)
        else:
            cert = COMMANDS[args.command](args.input, config)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DimensionLimitError as exc:
        print(f"dimension limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT

    text = cert.dumps()
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.summary:
        print(cert.summary(), file=sys.stderr)
    if cert.limit_exceeded:
        print(cert.error, file=sys.stderr)
        return EXIT_LIMIT
    if not cert.passed:
        print(f"failing checks: {', '.join(cert.failing()) or cert.error}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
