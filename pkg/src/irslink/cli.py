"""Command-line entry points: train, eval, sweep-m, gamma-map.

Exit codes: 0 on success, 2 on configuration errors (bad flags, malformed
config or profile files), 3 on runtime aborts (infeasible protocol,
diverged training, unexpected failures).
"""
from __future__ import annotations

import argparse
import sys

from . import harness, metaatom
from .config import load_config
from .errors import ConfigurationError
from .protocol import SCHEMES


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irslink",
        description="IRS-assisted uplink simulator with limited-feedback codebooks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train codebook-control agents")
    train.add_argument("--config", required=True)
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluate one scheme at one codebook size")
    ev.add_argument("--config", required=True)
    ev.add_argument("--checkpoints", default=None)
    ev.add_argument("--scheme", required=True, choices=SCHEMES)
    ev.add_argument("--M", type=int, required=True, dest="m")
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--out", required=True)

    sweep = sub.add_parser("sweep-m", help="evaluate a list of codebook sizes")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--checkpoints", default=None)
    sweep.add_argument("--M", required=True, dest="m_list",
                       help="comma-separated codebook sizes, e.g. 1,2,4,8")
    sweep.add_argument("--schemes", default="mdpic",
                       help="comma-separated subset of " + ",".join(SCHEMES))
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--out", required=True)

    gmap = sub.add_parser("gamma-map", help="tabulate reflection over (C, theta)")
    gmap.add_argument("--profile", default=None,
                      help="circuit profile CSV; omit for the built-in profile")
    gmap.add_argument("--out", required=True)
    gmap.add_argument("--c-min-pf", type=float, default=0.4)
    gmap.add_argument("--c-max-pf", type=float, default=2.7)
    gmap.add_argument("--grid", type=int, default=50)
    return parser


def _parse_int_list(text: str):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ConfigurationError(f"empty list: {text!r}")
    return values


def _run(args) -> int:
    if args.command == "train":
        run = harness.run_training(load_config(args.config), args.out, args.seed)
        print(f"trained {len(run.result.agents)} agent(s); checkpoints in {run.checkpoints_dir}")
        return 0
    if args.command == "eval":
        cfg = load_config(args.config).replace(m=args.m)
        run = harness.run_utilization(cfg, args.checkpoints, args.scheme, args.m,
                                      args.out, args.seed)
        print(f"{args.scheme} M={args.m}: mean rate {run.rates.mean():.4g} bits/s, "
              f"mean effective rate {run.effective_rates.mean():.4g} bits/s")
        return 0
    if args.command == "sweep-m":
        cfg = load_config(args.config)
        m_values = _parse_int_list(args.m_list)
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
        for s in schemes:
            if s not in SCHEMES:
                raise ConfigurationError(f"unknown scheme {s!r} in --schemes")
        _, sweep_csv = harness.sweep_m(cfg, args.checkpoints, m_values, schemes,
                                       args.out, args.seed)
        print(f"sweep table written to {sweep_csv}")
        return 0
    if args.command == "gamma-map":
        if args.profile is None:
            profile = metaatom.default_profile()
        else:
            profile = metaatom.load_profile_csv(args.profile)
        bounds = metaatom.CapacitanceBounds(args.c_min_pf * 1e-12, args.c_max_pf * 1e-12)
        out = harness.gamma_map(profile, bounds, args.out, args.grid, args.grid)
        print(f"gamma map written to {out}")
        return 0
    raise ConfigurationError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
