"""Experiment harness: training runs, deployed evaluation, sweeps, CSV output.

Every run is fully determined by (config, seed): all randomness flows
through named substreams of the master seed and CSV floats are written with
repr, so re-running a command reproduces its output files byte for byte.
Wall-clock time and other non-reproducible metadata go to a run_info.json
sidecar, never into the CSVs.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from . import agent as agent_mod
from . import channel, codebook, metaatom, protocol
from .agent import Normalization, utilization_step
from .codebook import StepSizes, ra_update, rvq_codebook
from .config import ExperimentConfig
from .errors import ConfigurationError
from .seeding import substream

METRICS_COLUMNS = ["run_id", "phase", "scheme", "episode", "timestep", "m",
                   "selected_index", "rate_bps", "effective_rate_bps",
                   "reward_mean", "epsilon"]
CURVE_COLUMNS = ["episode", "mean_effective_rate_bps", "moving_avg_bps"]
TIMESTEP_COLUMNS = ["timestep", "mean_rate_bps"]
SUMMARY_COLUMNS = ["scheme", "m", "mean_rate_bps", "mean_effective_rate_bps",
                   "mean_overhead_s"]
GAMMA_MAP_COLUMNS = ["c_pf", "theta_deg", "gamma_abs", "gamma_phase_deg"]


def _fmt(value) -> str:
    """Deterministic CSV cell: repr for floats, str for ints, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_id_for(cfg: ExperimentConfig, seed: int) -> str:
    """Short deterministic identifier of (config, seed)."""
    payload = json.dumps(cfg.to_dict(), sort_keys=True) + f"|seed={seed}"
    return hashlib.sha256(payload.encode("utf8")).hexdigest()[:12]


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; the first window-1 entries average what exists."""
    out = np.empty(len(x))
    c = np.concatenate([[0.0], np.cumsum(x)])
    for i in range(len(x)):
        lo = max(0, i - window + 1)
        out[i] = (c[i + 1] - c[lo]) / (i + 1 - lo)
    return out


def _write_run_info(out_dir, run_id, cfg, seed, elapsed) -> None:
    info = {"run_id": run_id, "seed": seed, "elapsed_s": elapsed,
            "config": cfg.to_dict()}
    with open(os.path.join(out_dir, "run_info.json"), "w") as fh:
        json.dump(info, fh, indent=2)


@dataclass
class TrainingRun:
    run_id: str
    result: agent_mod.TrainResult
    checkpoints_dir: str
    curve_csv: str
    metrics_csv: str


def run_training(cfg: ExperimentConfig, out_dir, seed: int | None = None) -> TrainingRun:
    """Train agents, write the learning curve, metrics, and a checkpoint."""
    if seed is None:
        seed = cfg.seed
    os.makedirs(out_dir, exist_ok=True)
    run_id = run_id_for(cfg, seed)
    t0 = time.perf_counter()
    result = agent_mod.train(cfg, seed)
    elapsed = time.perf_counter() - t0

    ma = moving_average(result.episode_eff_rate, cfg.ma_window)
    curve_csv = os.path.join(out_dir, "training_curve.csv")
    _write_csv(curve_csv, CURVE_COLUMNS,
               [(e, result.episode_eff_rate[e], ma[e])
                for e in range(cfg.n_episode)])

    scheme = "mdpic" if cfg.m_a > 1 else "sdpic"
    metrics_csv = os.path.join(out_dir, "metrics.csv")
    _write_csv(metrics_csv, METRICS_COLUMNS,
               [(run_id, "train", scheme, e, None, cfg.m_a, None, None,
                 result.episode_eff_rate[e], result.episode_reward[e],
                 result.epsilons[e])
                for e in range(cfg.n_episode)])

    ckpt = os.path.join(out_dir, "checkpoints")
    agent_mod.save_checkpoint(ckpt, result, cfg.hidden)
    _write_run_info(out_dir, run_id, cfg, seed, elapsed)
    return TrainingRun(run_id=run_id, result=result, checkpoints_dir=ckpt,
                       curve_csv=curve_csv, metrics_csv=metrics_csv)


@dataclass
class UtilizationRun:
    run_id: str
    scheme: str
    m: int
    rates: np.ndarray           # (episodes, timesteps) selected instantaneous rate
    effective_rates: np.ndarray
    overheads: np.ndarray
    timestep_csv: str
    summary_csv: str
    metrics_csv: str


def run_utilization(cfg: ExperimentConfig, checkpoints_dir, scheme: str, m: int,
                    out_dir, seed: int | None = None) -> UtilizationRun:
    """Evaluate one scheme at codebook size m over fresh episodes.

    rvq redraws the whole codebook every block; ra re-scatters around the
    winner; sdpic/mdpic load trained agents from checkpoints_dir and apply
    noise-free quantized policy steps.
    """
    if scheme not in protocol.SCHEMES:
        raise ConfigurationError(
            f"unknown scheme {scheme!r}, expected one of {protocol.SCHEMES}")
    if seed is None:
        seed = cfg.seed
    os.makedirs(out_dir, exist_ok=True)
    run_id = run_id_for(cfg, seed)
    t0 = time.perf_counter()

    profile = cfg.profile()
    bounds = cfg.bounds()
    budget = cfg.link_budget()
    timings = cfg.timings()
    model = cfg.channel_model()
    steps = StepSizes.from_bounds(bounds)
    learned = scheme in ("sdpic", "mdpic")
    if learned:
        if checkpoints_dir is None:
            raise ConfigurationError(f"scheme {scheme} needs a checkpoint directory")
        agents, directions, norm = agent_mod.load_checkpoint(checkpoints_dir)
        if scheme == "sdpic":
            agents = agents[:1]
    else:
        agents, directions, norm = None, None, None

    n_ep, n_t = cfg.util_episodes, cfg.util_timesteps
    rates = np.zeros((n_ep, n_t))
    eff = np.zeros((n_ep, n_t))
    over = np.zeros((n_ep, n_t))
    rows = []
    for e in range(n_ep):
        geom = cfg.make_geometry(substream(seed, "util-geometry", e))
        ch_rng = substream(seed, "util-channel", e)
        cb_rng = substream(seed, "util-codebook", e)
        state = channel.sample_initial(model, geom, ch_rng)
        cb = rvq_codebook(m, cfg.n_g, bounds, cb_rng)
        for t in range(n_t):
            if scheme == "rvq" and t > 0:
                cb = rvq_codebook(m, cfg.n_g, bounds, cb_rng)
            if learned:
                result, cb = utilization_step(agents, cb, state, directions,
                                              profile, budget, timings, bounds, norm)
            else:
                result = protocol.run_block(cb, state, profile, budget, timings, scheme)
                if scheme == "ra":
                    q_star = cb[result.selected_index - 1]
                    cb = ra_update(q_star, m, steps.ra, bounds, cb_rng)
            rates[e, t] = result.rate
            eff[e, t] = result.effective_rate
            over[e, t] = result.overhead
            rows.append((run_id, "eval", scheme, e, t, m, result.selected_index,
                         result.rate, result.effective_rate, None, None))
            state = channel.evolve(state, geom, cfg.t_c_s, ch_rng)
    elapsed = time.perf_counter() - t0

    metrics_csv = os.path.join(out_dir, "metrics.csv")
    _write_csv(metrics_csv, METRICS_COLUMNS, rows)
    timestep_csv = os.path.join(out_dir, "rate_vs_timestep.csv")
    _write_csv(timestep_csv, TIMESTEP_COLUMNS,
               [(t, rates[:, t].mean()) for t in range(n_t)])
    summary_csv = os.path.join(out_dir, "summary.csv")
    _write_csv(summary_csv, SUMMARY_COLUMNS,
               [(scheme, m, rates.mean(), eff.mean(), over.mean())])
    _write_run_info(out_dir, run_id, cfg, seed, elapsed)
    return UtilizationRun(run_id=run_id, scheme=scheme, m=m, rates=rates,
                          effective_rates=eff, overheads=over,
                          timestep_csv=timestep_csv, summary_csv=summary_csv,
                          metrics_csv=metrics_csv)


def sweep_m(cfg: ExperimentConfig, checkpoints_dir, m_values, schemes, out_dir,
            seed: int | None = None):
    """Evaluate scheme x M combinations and tabulate effective rates.

    Returns (runs, sweep_csv); one CSV row per (scheme, M) in given order.
    """
    if seed is None:
        seed = cfg.seed
    os.makedirs(out_dir, exist_ok=True)
    runs = []
    rows = []
    for scheme in schemes:
        for m in m_values:
            sub = os.path.join(out_dir, f"{scheme}_m{m}")
            run = run_utilization(cfg.replace(m=int(m)), checkpoints_dir, scheme,
                                  int(m), sub, seed)
            runs.append(run)
            rows.append((scheme, m, run.rates.mean(), run.effective_rates.mean(),
                         run.overheads.mean()))
    sweep_csv = os.path.join(out_dir, "sweep.csv")
    _write_csv(sweep_csv, SUMMARY_COLUMNS, rows)
    return runs, sweep_csv


def gamma_map(profile: metaatom.CircuitProfile, bounds: metaatom.CapacitanceBounds,
              out_csv, n_c: int = 50, n_theta: int = 50) -> str:
    """Tabulate |Gamma| and phase on a (C, theta) grid to CSV."""
    c = np.linspace(bounds.c_min, bounds.c_max, n_c)
    theta = np.linspace(0.0, 90.0, n_theta)
    grid = metaatom.gamma_grid(profile, c, theta)
    rows = []
    for i in range(n_theta):
        for j in range(n_c):
            g = grid[i, j]
            rows.append((c[j] / 1e-12, theta[i], abs(g), np.degrees(np.angle(g))))
    _write_csv(out_csv, GAMMA_MAP_COLUMNS, rows)
    return out_csv
