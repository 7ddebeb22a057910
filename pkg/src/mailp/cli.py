"""Command-line entry point.

Subcommands: bounds-sweep, mailp-sim, mailp-verify, posg-props, pursuit-train,
pursuit-eval, pursuit-random.  Exit codes: 0 success, 2 config/parse error,
3 domain error from a module, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys

from . import config as config_mod
from . import experiments
from .errors import ConfigError, DomainError, InvariantError, VerificationFailure

COMMANDS = (
    "bounds-sweep",
    "mailp-sim",
    "mailp-verify",
    "posg-props",
    "pursuit-train",
    "pursuit-eval",
    "pursuit-random",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mailp",
        description="Information-transfer experiments: bounds, simulations, POSG checks, pursuit runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name.replace('-', '_')} experiment")
        p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--seeds", default=None, help="seed list override, e.g. 0..9 or 1,4,7")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind = args.command.replace("-", "_")
    try:
        cfg = config_mod.load_config(args.config, kind)
        seeds = config_mod.parse_seed_spec(args.seeds) if args.seeds is not None else None
        cfg = experiments.apply_seed_override(kind, cfg, seeds)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        written = experiments.run(kind, cfg, args.out, jobs=args.jobs, plot=not args.no_plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 4
    except (DomainError, InvariantError, ValueError, KeyError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
