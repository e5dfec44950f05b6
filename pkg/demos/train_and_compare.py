"""Train the codebook-control agents, then race the three schemes.

Runs the laptop-scale configuration end to end: train two agents that steer
the direction codebook, plot the learning curve as text, then evaluate the
trained scheme against the two untrained baselines at the same codebook
size.  Takes about a minute; all artifacts land in --out as CSV.

Run:  python3 demos/train_and_compare.py [--out demo_out]
"""
import argparse
import csv
import time

import numpy as np

from irslink.config import desk_config
from irslink.harness import run_training, run_utilization

SPARK = " .:-=+*#%@"


def sparkline(values, width=60):
    v = np.asarray(values, dtype=float)
    if len(v) > width:                       # box-average down to the width
        edges = np.linspace(0, len(v), width + 1).astype(int)
        v = np.array([v[a:b].mean() for a, b in zip(edges, edges[1:])])
    lo, hi = v.min(), v.max()
    scaled = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    return "".join(SPARK[int(round(s * (len(SPARK) - 1)))] for s in scaled)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = desk_config()
    print(f"=== Training {cfg.m_a} agents, {cfg.n_episode} episodes x "
          f"{cfg.n_timestep} blocks (surface: {cfg.n_irs} elements in "
          f"{cfg.n_g} groups)")
    t0 = time.perf_counter()
    run = run_training(cfg, f"{args.out}/train", seed=args.seed)
    print(f"done in {time.perf_counter() - t0:.0f}s; "
          f"checkpoints in {run.checkpoints_dir}")

    with open(run.curve_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ma = [float(r["moving_avg_bps"]) for r in rows]
    print(f"\nmoving-average effective rate across episodes "
          f"({ma[0] / 1e6:.3f} -> {ma[-1] / 1e6:.3f} Mbit/s):")
    print("  " + sparkline(ma))

    print(f"\n=== Utilization: {cfg.util_episodes} episodes x "
          f"{cfg.util_timesteps} blocks at M = 4")
    print(f"{'scheme':>7} {'raw [Mbit/s]':>13} {'effective [Mbit/s]':>19}")
    results = {}
    for scheme, ckpt in (("rvq", None), ("ra", None),
                         ("mdpic", run.checkpoints_dir)):
        r = run_utilization(cfg.replace(m=4), ckpt, scheme, 4,
                            f"{args.out}/{scheme}", seed=args.seed)
        results[scheme] = r
        print(f"{scheme:>7} {r.rates.mean() / 1e6:13.4f} "
              f"{r.effective_rates.mean() / 1e6:19.4f}")

    print("\nrvq redraws codewords blindly every block; ra re-scatters around "
          "the last\nwinner; mdpic steers each codeword with its trained agent. "
          "Within an episode\nthe adaptive schemes climb while rvq stays flat:")
    for scheme in ("rvq", "ra", "mdpic"):
        per_t = results[scheme].rates.mean(axis=0)
        print(f"  {scheme:>6} over a block sequence: {sparkline(per_t, 30)} "
              f"(t0 {per_t[0] / 1e6:.3f}, t5 {per_t[5] / 1e6:.3f} Mbit/s)")


if __name__ == "__main__":
    main()
