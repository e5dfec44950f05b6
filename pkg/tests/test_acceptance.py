"""Release checklist: one test per numbered acceptance criterion.

Each test evaluates every clause of its criterion, prints a single
``[acceptance] criterion N: PASS/FAIL (...)`` line with the measured
numbers, and then asserts.  Criteria with stated runtime budgets time
themselves and fail when over budget.  The slow criteria (7 and 8) share
one session-scoped desk-configuration training run.
"""
import csv
import pathlib
import time

import numpy as np
import pytest
from conftest import make_angle_profile, make_channel_state

from irslink import harness
from irslink.agent import DdpgAgent, ddpg_update, quantize
from irslink.channel import (ChannelModel, Geometry, effective_channel,
                             effective_channels, evolve, sample_initial)
from irslink.cli import main as cli_main
from irslink.config import desk_config, save_config
from irslink.metaatom import (CapacitanceBounds, CircuitProfile,
                              default_profile, gamma_grid, phase_sweep_deg,
                              reflection_coefficient)
from irslink.neural import AdamState, Mlp, adam_step
from irslink.protocol import (LinkBudget, Timings, data_rate, feedback_bits,
                              sound_and_select, time_overhead)

Z0 = 376.73
WAVELENGTH = 3e8 / 5.195e9


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[acceptance] criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num}: {detail}"


# ------------------------------------------------- shared desk training run

@pytest.fixture(scope="session")
def desk_train(tmp_path_factory):
    """One seed-0 desk-configuration training run shared by criteria 7/8."""
    out = tmp_path_factory.mktemp("acceptance_train")
    cfg = desk_config()
    t0 = time.perf_counter()
    run = harness.run_training(cfg, out, seed=0)
    return cfg, run, time.perf_counter() - t0


# ------------------------------------------------------------- criterion 1

def test_criterion_1_reflection_physics():
    t0 = time.perf_counter()
    profile = default_profile()
    bounds = CapacitanceBounds(0.4e-12, 2.7e-12)

    grid = gamma_grid(profile, np.linspace(bounds.c_min, bounds.c_max, 50),
                      np.linspace(0.0, 90.0, 50))
    worst_mag = float(np.max(np.abs(grid)))

    # matched load: choose R_T so the full circuit impedance lands on z0
    w = 2.0 * np.pi * 5.195e9
    b = w * 1.5e-9
    r_t = Z0 * b * b / (b * b + Z0 * Z0)
    x_target = -Z0 * Z0 * b / (b * b + Z0 * Z0)
    inv_wc = w * 1.0e-9 - 1.0 / (w * 1.0e-12) - x_target
    matched = CircuitProfile(theta_deg=np.array([0.0]), l_t=np.array([1.0e-9]),
                             c_t=np.array([1.0e-12]), r_t=np.array([r_t]),
                             l_b=np.array([1.5e-9]), f=5.195e9, z0=Z0)
    residual = abs(reflection_coefficient(1.0 / (w * inv_wc), 0.0, matched))

    sweep = phase_sweep_deg(profile, bounds)
    elapsed = time.perf_counter() - t0
    ok = (worst_mag <= 1.0 + 1e-9 and residual < 1e-12 and sweep > 300.0
          and elapsed < 1.0)
    _report(1, ok, f"max|G|={worst_mag:.12f}, matched residual={residual:.1e}, "
                   f"sweep={sweep:.2f} deg, {elapsed:.2f}s")


# ------------------------------------------------------------- criterion 2

def test_criterion_2_overhead_arithmetic():
    timings = Timings(t_c=5e-3, t_reconf=100e-6, r_feedback=0.1)
    w = 1e7
    tp_ra = time_overhead("ra", 8, timings, w)
    tp_ra_last = time_overhead("ra", 8, timings, w, final_reconf_needed=False)
    bits = feedback_bits("mdpic", 8, k=2048)
    tp_dpic = time_overhead("mdpic", 8, timings, w, k=2048)
    duty = (timings.t_c - tp_ra) / timings.t_c
    ok = (abs(tp_ra - 903e-6) < 1e-12 and abs(tp_ra_last - 803e-6) < 1e-12
          and bits == 91 and abs(tp_dpic - 991e-6) < 1e-12
          and tp_dpic == time_overhead("sdpic", 8, timings, w, k=2048)
          and abs(duty - 0.8194) < 1e-4)
    _report(2, ok, f"T_p(ra,8)={tp_ra * 1e6:.0f}us/{tp_ra_last * 1e6:.0f}us, "
                   f"bits={bits}, T_p(dpic,8)={tp_dpic * 1e6:.0f}us, duty={duty:.4f}")


# ------------------------------------------------------------- criterion 3

def _fd_param_grads(net, x, r, h=1e-5):
    out = []
    for p in net.params():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            lp = float(np.sum(net.forward(x) * r))
            p[idx] = orig - h
            lm = float(np.sum(net.forward(x) * r))
            p[idx] = orig
            g[idx] = (lp - lm) / (2 * h)
        out.append(g)
    return out


def _reference_adam(params, grad_seq, lr, b1=0.9, b2=0.999, eps=1e-8):
    """Bias-corrected Adam written independently of adam_step."""
    params = [p.copy() for p in params]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    for t, grads in enumerate(grad_seq, start=1):
        for i, g in enumerate(grads):
            m[i] = b1 * m[i] + (1 - b1) * g
            v[i] = b2 * v[i] + (1 - b2) * g * g
            params[i] = params[i] - lr * (m[i] / (1 - b1 ** t)) / (
                np.sqrt(v[i] / (1 - b2 ** t)) + eps)
    return params


def test_criterion_3_gradients_adam_critic_convergence():
    # backprop vs central finite differences, 20 random smooth nets
    fd_ok, worst_rel = True, 0.0
    for trial in range(20):
        rng = np.random.default_rng(500 + trial)
        sizes = [int(rng.integers(2, 5)), int(rng.integers(3, 7)),
                 int(rng.integers(1, 4))]
        net = Mlp.init(sizes, rng, hidden_activation="tanh",
                       output_activation=str(rng.choice(["linear", "tanh"])))
        x = rng.standard_normal((2, sizes[0]))
        r = rng.standard_normal((2, sizes[-1]))
        _, cache = net.forward_cached(x)
        grads, _ = net.backward(cache, r)
        for a, b in zip(grads, _fd_param_grads(net, x, r)):
            fd_ok &= np.allclose(a, b, rtol=1e-4, atol=1e-7)
            big = np.abs(b) > 1e-4
            if big.any():
                worst_rel = max(worst_rel, float(
                    np.max(np.abs(a[big] - b[big]) / np.abs(b[big]))))

    rng = np.random.default_rng(600)
    params = [rng.standard_normal((3, 2)), rng.standard_normal(2)]
    grad_seq = [[rng.standard_normal((3, 2)), rng.standard_normal(2)]
                for _ in range(3)]
    expected = _reference_adam(params, grad_seq, lr=0.01)
    live = [p.copy() for p in params]
    state = AdamState.for_params(live, lr=0.01)
    for grads in grad_seq:
        adam_step(live, grads, state)
    adam_ok = all(np.allclose(p, e, rtol=1e-12) for p, e in zip(live, expected))

    # tau = 0 freezes the targets: repeated updates on one batch must
    # monotonically shrink the critic regression error
    rng = np.random.default_rng(601)
    agent = DdpgAgent.build(6, 3, hidden=(16, 16), action_bound=1.0,
                            gamma=0.9, tau=0.0, lr_actor=1e-4, lr_critic=1e-3,
                            buffer_capacity=256, rng=rng)
    batch = (rng.standard_normal((32, 6)), rng.standard_normal((32, 3)),
             rng.standard_normal(32), rng.standard_normal((32, 6)))
    losses = [ddpg_update(agent, batch)["critic_loss"] for _ in range(50)]
    mse_ok = all(b < a for a, b in zip(losses, losses[1:]))

    ok = fd_ok and adam_ok and mse_ok
    _report(3, ok, f"fd worst rel={worst_rel:.2e}, adam 3-step match={adam_ok}, "
                   f"critic mse {losses[0]:.3f}->{losses[-1]:.3f} strict={mse_ok}")


# ------------------------------------------------------------- criterion 4

def _naive_effective_channel(state, q, profile, n_g):
    n_bs, n_irs = state.H_ib.shape
    per_element = np.repeat(np.asarray(q, dtype=float), n_irs // n_g)
    out = np.array(state.h_ub, dtype=complex)
    for n in range(n_bs):
        for l in range(state.ui_paths.count):
            theta = state.ui_paths.aoa_deg[l]
            for i in range(n_irs):
                g = reflection_coefficient(per_element[i], theta, profile)
                out[n] += state.H_ib[n, i] * g * state.ui_mat[l, i]
    return out


def test_criterion_4_selection_quantization_channel_oracles():
    profile = make_angle_profile()
    budget = LinkBudget(p=0.1, sigma2=1e-11, w=1e7)

    sel_ok = True
    rng = np.random.default_rng(700)
    for _ in range(1000):
        state = make_channel_state(rng, n_bs=2, n_irs=6, n_paths=3)
        cb = rng.uniform(0.4e-12, 2.7e-12, size=(int(rng.integers(1, 7)), 3))
        sel, rates = sound_and_select(cb, state, profile, budget)
        best_i, best_r = 0, -1.0
        for i in range(cb.shape[0]):
            r = data_rate(effective_channel(state, cb[i], profile), budget)
            sel_ok &= abs(rates[i] - r) <= 1e-12 * r
            if r > best_r:
                best_i, best_r = i, r
        sel_ok &= sel == best_i + 1

    quant_ok = True
    rng = np.random.default_rng(701)
    for _ in range(1000):
        directions = rng.uniform(-1, 1, size=(int(rng.integers(2, 65)), 4))
        u = rng.uniform(-1.2, 1.2, 4)
        dists = [float(np.sum((d - u) ** 2)) for d in directions]
        quant_ok &= quantize(u, directions) == int(np.argmin(dists))

    chan_worst = 0.0
    rng = np.random.default_rng(702)
    for _ in range(100):
        state = make_channel_state(rng, n_bs=3, n_irs=6, n_paths=4)
        q = rng.uniform(0.4e-12, 2.7e-12, 3)
        fast = effective_channel(state, q, profile)
        slow = _naive_effective_channel(state, q, profile, 3)
        chan_worst = max(chan_worst, float(
            np.max(np.abs(fast - slow) / np.abs(slow))))
    chan_ok = chan_worst < 1e-12

    ok = sel_ok and quant_ok and chan_ok
    _report(4, ok, f"selection 1000/1000={sel_ok}, quantize 1000/1000={quant_ok}, "
                   f"channel worst rel={chan_worst:.1e}")


# ------------------------------------------------------------- criterion 5

def test_criterion_5_fading_statistics():
    t0 = time.perf_counter()
    model = ChannelModel(n_bs=1, n_irs=1, n_paths=10, rho=0.95)
    geom = Geometry(bs_pos=[0.0, 0.0], irs_pos=[90.0, 30.0],
                    ue_pos=[100.0, 0.0], ue_speed=0.0, ue_heading=0.0,
                    d_bs=WAVELENGTH / 2.0, d_irs=WAVELENGTH / 10.0,
                    wavelength=WAVELENGTH)
    rng = np.random.default_rng(2)
    st = sample_initial(model, geom, rng)
    n = 10_000
    ub = np.empty((10, n), dtype=complex)
    ib = np.empty((10, n), dtype=complex)
    ui = np.empty((10, n), dtype=complex)
    for t in range(n):
        st = evolve(st, geom, 5e-3, rng)
        ub[:, t] = st.ub_paths.gains
        ib[:, t] = st.ib_paths.gains
        ui[:, t] = st.ui_paths.gains
    variances = np.vstack([ub, ib, ui]).var(axis=1)
    re = ub.real
    lag = np.array([np.corrcoef(re[i, :-1], re[i, 1:])[0, 1] for i in range(10)])
    elapsed = time.perf_counter() - t0
    ok = (np.all(variances > 0.9) and np.all(variances < 1.1)
          and np.all(lag > 0.93) and np.all(lag < 0.97) and elapsed < 10.0)
    _report(5, ok, f"var in [{variances.min():.3f},{variances.max():.3f}], "
                   f"lag1 in [{lag.min():.4f},{lag.max():.4f}], {elapsed:.1f}s")


# ------------------------------------------------------------- criterion 6

def test_criterion_6_scattered_codebook_rampup(tmp_path):
    t0 = time.perf_counter()
    cfg = desk_config()
    run = harness.run_utilization(cfg, None, "ra", 8, tmp_path, seed=0)
    per_timestep = run.rates.mean(axis=0)
    ratio = float(per_timestep[5] / per_timestep[0])
    elapsed = time.perf_counter() - t0
    ok = ratio >= 1.05 and elapsed < 120.0
    _report(6, ok, f"t5/t0={ratio:.4f} (need >=1.05), {elapsed:.0f}s")


# ------------------------------------------------------------- criterion 7

def test_criterion_7_learning_progress_and_rate_ordering(desk_train, tmp_path):
    cfg, run, train_s = desk_train
    t0 = time.perf_counter()
    with open(run.curve_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    eff = np.array([float(r["mean_effective_rate_bps"]) for r in rows])
    ma_end = float(rows[-1]["moving_avg_bps"])
    first_window = float(eff[:cfg.ma_window].mean())
    learn_ok = ma_end > first_window

    md = harness.run_utilization(cfg.replace(m=4), run.checkpoints_dir,
                                 "mdpic", 4, tmp_path / "mdpic", seed=0)
    rv = harness.run_utilization(cfg.replace(m=4), None, "rvq", 4,
                                 tmp_path / "rvq", seed=0)
    ratio = float(md.rates.mean() / rv.rates.mean())
    # Margin currently not met at desk scale: trained policies sit near
    # 1.03x the redrawn-codebook baseline.  Threshold kept as stated
    # rather than loosened; see README, "Known limitations".
    order_ok = ratio >= 1.10
    elapsed = train_s + time.perf_counter() - t0
    ok = learn_ok and order_ok and elapsed < 1800.0
    _report(7, ok, f"moving avg {first_window:.4g}->{ma_end:.4g} rise={learn_ok}, "
                   f"mdpic/rvq rate ratio={ratio:.4f} (need >=1.10), {elapsed:.0f}s")


# ------------------------------------------------------------- criterion 8

def test_criterion_8_effective_rate_interior_maximum(desk_train, tmp_path):
    cfg, run, _ = desk_train
    t0 = time.perf_counter()
    _, sweep_csv = harness.sweep_m(cfg, run.checkpoints_dir, [1, 2, 4, 8],
                                   ["mdpic"], tmp_path, seed=0)
    with open(sweep_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ms = [int(r["m"]) for r in rows]
    eff = [float(r["mean_effective_rate_bps"]) for r in rows]
    best_m = ms[int(np.argmax(eff))]
    elapsed = time.perf_counter() - t0
    ok = best_m not in (min(ms), max(ms)) and elapsed < 600.0
    table = ", ".join(f"M={m}:{e:.4g}" for m, e in zip(ms, eff))
    _report(8, ok, f"argmax at M={best_m} (interior of {{1,2,4,8}}); "
                   f"{table}; {elapsed:.0f}s")


# ------------------------------------------------------------- criterion 9

def _csv_bytes(root):
    root = pathlib.Path(root)
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*.csv"))}


def test_criterion_9_rerun_determinism(tmp_path):
    cfg_path = tmp_path / "tiny.json"
    save_config(desk_config().replace(n_episode=2, n_timestep=5, hidden=(8, 8),
                                      n_batch=2, buffer_capacity=64,
                                      util_episodes=3, util_timesteps=4),
                cfg_path)
    commands = {
        "train": ["train", "--config", str(cfg_path), "--seed", "3"],
        "eval_rvq": ["eval", "--config", str(cfg_path), "--scheme", "rvq",
                     "--M", "2", "--seed", "3"],
        "sweep": ["sweep-m", "--config", str(cfg_path), "--schemes", "ra",
                  "--M", "1,2", "--seed", "3"],
    }
    ok, details = True, []
    for name, argv in commands.items():
        pair = []
        for rep in ("a", "b"):
            out = tmp_path / f"{name}_{rep}"
            assert cli_main(argv + ["--out", str(out)]) == 0
            pair.append(_csv_bytes(out))
        same = pair[0].keys() == pair[1].keys() and all(
            pair[0][k] == pair[1][k] for k in pair[0])
        ok &= same and len(pair[0]) > 0
        details.append(f"{name}:{len(pair[0])}csv identical={same}")
    # mdpic eval through the trained checkpoints, twice
    ckpt = tmp_path / "train_a" / "checkpoints"
    pair = []
    for rep in ("a", "b"):
        out = tmp_path / f"eval_mdpic_{rep}"
        assert cli_main(["eval", "--config", str(cfg_path), "--checkpoints",
                         str(ckpt), "--scheme", "mdpic", "--M", "2",
                         "--seed", "3", "--out", str(out)]) == 0
        pair.append(_csv_bytes(out))
    same = pair[0] == pair[1]
    ok &= same
    details.append(f"eval_mdpic:{len(pair[0])}csv identical={same}")
    # gamma-map writes one CSV straight to the given path
    maps = []
    for rep in ("a", "b"):
        out = tmp_path / f"map_{rep}.csv"
        assert cli_main(["gamma-map", "--grid", "12", "--out", str(out)]) == 0
        maps.append(out.read_bytes())
    same = maps[0] == maps[1]
    ok &= same
    details.append(f"gamma-map identical={same}")
    _report(9, ok, "; ".join(details))
