"""Policy-driven codebook control trained with DDPG.

Each codeword of the feedback codebook is controlled by an agent (several
codewords may share one agent).  Per coherence block an agent observes the
effective channel obtained with its codeword plus the codeword itself,
proposes a bounded capacitance step, and the step is snapped to the nearest
entry of a shared direction codebook so only its index needs feeding back.
Training follows the standard DDPG recipe: replay buffer, target networks
with soft updates, Adam on both critic and actor.

States, actions and rewards are normalized: the effective channel is scaled
by sqrt(P / (sigma2 * N_BS * N_G)), capacitances by 1e12, actions by 1e13,
and rates by the bandwidth.  Conversion back to farads happens only where a
direction step is applied to a codeword.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import channel, codebook, neural, protocol
from .codebook import DirectionCodebook, StepSizes, dpic_apply, rvq_codebook
from .errors import ConfigurationError, DivergenceError
from .metaatom import CapacitanceBounds
from .seeding import substream


@dataclass(frozen=True)
class Normalization:
    """Scales applied before anything enters a network."""

    h_scale: float
    q_scale: float = 1e12
    a_scale: float = 1e13

    @classmethod
    def from_budget(cls, p: float, sigma2: float, n_bs: int, n_g: int) -> "Normalization":
        return cls(h_scale=float(np.sqrt(p / (sigma2 * n_bs * n_g))))


def build_state(h_eff: np.ndarray, q: np.ndarray, norm: Normalization) -> np.ndarray:
    """Observation vector [Re(h), Im(h), q] in normalized units, length 2*N_BS + N_G."""
    h = np.asarray(h_eff) * norm.h_scale
    return np.concatenate([h.real, h.imag, np.asarray(q, dtype=float) * norm.q_scale])


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray


class ReplayBuffer:
    """Fixed-capacity FIFO transition store with uniform sampling.

    Backed by preallocated rings; the oldest transition is overwritten once
    the buffer is full.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigurationError(f"buffer capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self._s = self._a = self._r = self._s2 = None
        self._size = 0
        self._head = 0  # next write position

    def __len__(self) -> int:
        return self._size

    def push(self, s: np.ndarray, a: np.ndarray, r: float, s_next: np.ndarray) -> None:
        if self._s is None:
            self._s = np.empty((self.capacity, s.size))
            self._a = np.empty((self.capacity, a.size))
            self._r = np.empty(self.capacity)
            self._s2 = np.empty((self.capacity, s_next.size))
        i = self._head
        self._s[i] = s
        self._a[i] = a
        self._r[i] = r
        self._s2[i] = s_next
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator):
        """Uniform minibatch (S, A, R, S_next); requires len >= n."""
        if self._size < n:
            raise ConfigurationError(f"buffer holds {self._size} < batch size {n}")
        idx = rng.integers(0, self._size, size=n)
        return self._s[idx], self._a[idx], self._r[idx], self._s2[idx]

    def oldest_first(self):
        """Iterate stored transitions in insertion order (for inspection)."""
        start = (self._head - self._size) % self.capacity
        for j in range(self._size):
            i = (start + j) % self.capacity
            yield Transition(self._s[i].copy(), self._a[i].copy(),
                             float(self._r[i]), self._s2[i].copy())


@dataclass
class NoiseSchedule:
    """Exploration magnitude per episode: eps_e = max(eps_min, decay^e * eps0)."""

    epsilon0: float
    epsilon_min: float
    decay: float = 0.99

    @classmethod
    def from_bounds(cls, bounds: CapacitanceBounds, a_scale: float) -> "NoiseSchedule":
        eps0 = (bounds.c_max - bounds.c_min) / 5.0 * a_scale
        return cls(epsilon0=eps0, epsilon_min=eps0 / 300.0)

    def value(self, episode: int) -> float:
        return max(self.epsilon_min, self.epsilon0 * self.decay ** episode)


class DdpgAgent:
    """Actor-critic pair with target copies, Adam states, and a replay buffer."""

    def __init__(self, actor: neural.Mlp, critic: neural.Mlp, gamma: float, tau: float,
                 lr_actor: float, lr_critic: float, buffer_capacity: int):
        self.actor = actor
        self.critic = critic
        self.target_actor = actor.copy()
        self.target_critic = critic.copy()
        self.opt_actor = neural.AdamState.for_params(actor.params(), lr_actor)
        self.opt_critic = neural.AdamState.for_params(critic.params(), lr_critic)
        self.buffer = ReplayBuffer(buffer_capacity)
        self.gamma = float(gamma)
        self.tau = float(tau)
        self.state_dim = actor.input_dim
        self.action_dim = actor.output_dim

    @classmethod
    def build(cls, state_dim: int, action_dim: int, hidden, action_bound: float,
              gamma: float, tau: float, lr_actor: float, lr_critic: float,
              buffer_capacity: int, rng: np.random.Generator) -> "DdpgAgent":
        actor = neural.Mlp.init([state_dim, *hidden, action_dim], rng,
                                output_activation="tanh", output_scale=action_bound)
        critic = neural.Mlp.init([state_dim + action_dim, *hidden, 1], rng)
        return cls(actor, critic, gamma, tau, lr_actor, lr_critic, buffer_capacity)

    @property
    def action_bound(self) -> float:
        return self.actor.output_scale

    def policy(self, s: np.ndarray) -> np.ndarray:
        """Deterministic (noise-free) action; already inside [-bound, bound]."""
        return self.actor.forward(s)

    def params_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.actor.params() + self.critic.params())


def quantize(u: np.ndarray, directions: np.ndarray) -> int:
    """Index of the nearest direction in Euclidean norm (ties: lowest index)."""
    diff = directions - np.asarray(u)[None, :]
    return int(np.argmin(np.einsum("kd,kd->k", diff, diff)))


def behavior_action(agent: DdpgAgent, s: np.ndarray, noise_var: float,
                    directions: np.ndarray, rng: np.random.Generator):
    """Exploratory action and its quantization index.

    u = clip(actor(s) + v, [-bound, bound]) with v zero-mean Gaussian of
    per-entry variance noise_var; k indexes the nearest direction.  The
    directions array must already be in normalized action units.
    """
    a = agent.policy(s)
    if noise_var > 0.0:
        a = a + rng.standard_normal(a.size) * np.sqrt(noise_var)
    u = np.clip(a, -agent.action_bound, agent.action_bound)
    return u, quantize(u, directions)


def reward(rate_next: float, n_clip: int, nu: float, w: float) -> float:
    """Normalized reward (rate - nu * n_clip) / W for the previous action."""
    return (rate_next - nu * n_clip) / w


def assign_agent(m: int, m_a: int) -> int:
    """1-based agent index controlling codeword m: ((m-1) mod M_A) + 1."""
    if m < 1 or m_a < 1:
        raise ConfigurationError(f"need m >= 1 and m_a >= 1, got m={m}, m_a={m_a}")
    return (m - 1) % m_a + 1


def ddpg_update(agent: DdpgAgent, batch) -> dict:
    """One DDPG step on a minibatch; returns loss diagnostics.

    Critic regresses onto y = r + gamma * Q_target(s', pi_target(s')); the
    actor follows the critic's action gradient; both targets are then
    soft-updated with tau.
    """
    s, a, r, s2 = batch
    n = s.shape[0]

    a2 = agent.target_actor.forward(s2)
    q2 = agent.target_critic.forward(np.concatenate([s2, a2], axis=1))[:, 0]
    y = r + agent.gamma * q2

    q, cache = agent.critic.forward_cached(np.concatenate([s, a], axis=1))
    err = q[:, 0] - y
    critic_loss = float(np.mean(err * err))
    grads, _ = agent.critic.backward(cache, (2.0 * err / n)[:, None])
    neural.adam_step(agent.critic.params(), grads, agent.opt_critic)

    a_pi, actor_cache = agent.actor.forward_cached(s)
    q_pi, critic_cache = agent.critic.forward_cached(np.concatenate([s, a_pi], axis=1))
    # Ascend mean Q: upstream -1/n, then take the action slice of dQ/dinput.
    _, dx = agent.critic.backward(critic_cache, np.full((n, 1), -1.0 / n))
    actor_grads, _ = agent.actor.backward(actor_cache, dx[:, agent.state_dim:])
    neural.adam_step(agent.actor.params(), actor_grads, agent.opt_actor)

    neural.soft_update(agent.target_actor, agent.actor, agent.tau)
    neural.soft_update(agent.target_critic, agent.critic, agent.tau)
    return {
        "critic_loss": critic_loss,
        "actor_objective": float(np.mean(q_pi)),
        "targets": y,
    }


@dataclass
class TrainResult:
    agents: list
    episode_eff_rate: np.ndarray   # mean effective rate of the best codeword, bits/s
    episode_reward: np.ndarray     # mean normalized reward across agents and steps
    epsilons: np.ndarray
    directions: DirectionCodebook
    normalization: Normalization


def train(cfg, seed: int | None = None) -> TrainResult:
    """Run the episodic training loop on config cfg.

    Per episode: fresh channel realization and UE placement, a fresh random
    codebook of M_A codewords (one per agent), and a decayed exploration
    magnitude.  Per timestep: sound all codewords, hand each agent its
    reward for the previous step, store the transition, act, apply the
    quantized step, then one minibatch update per agent once its buffer
    holds a batch.  Transitions are stored from t=1 on (t=0 has no
    predecessor).
    """
    if seed is None:
        seed = cfg.seed
    profile = cfg.profile()
    bounds = cfg.bounds()
    budget = cfg.link_budget()
    timings = cfg.timings()
    model = cfg.channel_model()
    norm = Normalization.from_budget(budget.p, budget.sigma2, cfg.n_bs, cfg.n_g)
    directions = cfg.direction_codebook_obj()
    dirs_norm = directions.entries * norm.a_scale
    scheme = "mdpic" if cfg.m_a > 1 else "sdpic"
    nu = budget.w if cfg.nu is None else cfg.nu

    state_dim = 2 * cfg.n_bs + cfg.n_g
    agents = [
        DdpgAgent.build(state_dim, cfg.n_g, cfg.hidden,
                        action_bound=directions.delta * norm.a_scale,
                        gamma=cfg.gamma, tau=cfg.tau,
                        lr_actor=cfg.lr_actor, lr_critic=cfg.lr_critic,
                        buffer_capacity=cfg.buffer_capacity,
                        rng=substream(seed, "init", i))
        for i in range(cfg.m_a)
    ]
    schedule = NoiseSchedule.from_bounds(bounds, norm.a_scale)

    eff_rates = np.zeros(cfg.n_episode)
    rewards = np.zeros(cfg.n_episode)
    epsilons = np.zeros(cfg.n_episode)
    for e in range(cfg.n_episode):
        eps = schedule.value(e)
        noise_var = eps * eps if cfg.noise_is_std else eps
        epsilons[e] = eps
        geo_rng = substream(seed, "geometry", e)
        ch_rng = substream(seed, "channel", e)
        cb_rng = substream(seed, "codebook", e)
        noise_rng = substream(seed, "noise", e)
        sample_rng = substream(seed, "replay", e)
        geom = cfg.make_geometry(geo_rng)
        state = channel.sample_initial(model, geom, ch_rng)
        cb = rvq_codebook(cfg.m_a, cfg.n_g, bounds, cb_rng)
        prev = [None] * cfg.m_a
        eff_sum = 0.0
        r_sum, r_count = 0.0, 0
        for t in range(cfg.n_timestep):
            h = channel.effective_channels(state, cb, profile)
            rates = protocol.data_rate(h, budget)
            best = int(np.argmax(rates))
            t_p = protocol.time_overhead(scheme, cfg.m_a, timings, budget.w,
                                         k=directions.k,
                                         final_reconf_needed=(best + 1 != cfg.m_a))
            eff_sum += (timings.t_c - t_p) / timings.t_c * rates[best]
            for i in range(cfg.m_a):
                ag = agents[i]
                s = build_state(h[i], cb[i], norm)
                if prev[i] is not None:
                    s_prev, a_prev, nclip_prev = prev[i]
                    r_prev = reward(float(rates[i]), nclip_prev, nu, budget.w)
                    ag.buffer.push(s_prev, a_prev, r_prev, s)
                    r_sum += r_prev
                    r_count += 1
                u, k_idx = behavior_action(ag, s, noise_var, dirs_norm, noise_rng)
                cb[i], n_clip = dpic_apply(cb[i], directions.entries[k_idx], bounds)
                prev[i] = (s, u, n_clip)
                if len(ag.buffer) >= cfg.n_batch:
                    ddpg_update(ag, ag.buffer.sample(cfg.n_batch, sample_rng))
            state = channel.evolve(state, geom, cfg.t_c_s, ch_rng)
        eff_rates[e] = eff_sum / cfg.n_timestep
        rewards[e] = r_sum / r_count if r_count else 0.0
        for i, ag in enumerate(agents):
            if not ag.params_finite():
                raise DivergenceError(
                    f"non-finite parameters in agent {i + 1} after episode {e}"
                )
    return TrainResult(agents=agents, episode_eff_rate=eff_rates,
                       episode_reward=rewards, epsilons=epsilons,
                       directions=directions, normalization=norm)


def utilization_step(agents, cb: np.ndarray, state, directions: DirectionCodebook,
                     profile, budget, timings, bounds: CapacitanceBounds,
                     norm: Normalization):
    """One deployed coherence block: sound, select, then policy-update every codeword.

    Codeword m is updated by agent ((m-1) mod len(agents)) with zero
    exploration noise.  Returns (BlockResult, next codebook).
    """
    cb = np.atleast_2d(np.asarray(cb, dtype=float))
    m = cb.shape[0]
    scheme = "mdpic" if len(agents) > 1 else "sdpic"
    h = channel.effective_channels(state, cb, profile)
    rates = protocol.data_rate(h, budget)
    selected = int(np.argmax(rates)) + 1
    bits = protocol.feedback_bits(scheme, m, directions.k)
    t_p = protocol.time_overhead(scheme, m, timings, budget.w, directions.k,
                                 final_reconf_needed=(selected != m))
    rate = float(rates[selected - 1])
    result = protocol.BlockResult(
        selected_index=selected, rate=rate, overhead=t_p,
        effective_rate=(timings.t_c - t_p) / timings.t_c * rate,
        feedback_bits=bits)
    dirs_norm = directions.entries * norm.a_scale
    nxt = np.empty_like(cb)
    for i in range(m):
        ag = agents[assign_agent(i + 1, len(agents)) - 1]
        s = build_state(h[i], cb[i], norm)
        u = np.clip(ag.policy(s), -ag.action_bound, ag.action_bound)
        k_idx = quantize(u, dirs_norm)
        nxt[i], _ = dpic_apply(cb[i], directions.entries[k_idx], bounds)
    return result, nxt


def save_checkpoint(directory, result: TrainResult, hidden) -> None:
    """Write one weight file per network plus a manifest."""
    os.makedirs(directory, exist_ok=True)
    for i, ag in enumerate(result.agents, start=1):
        neural.save_weights(ag.actor, os.path.join(directory, f"actor_{i}.json"))
        neural.save_weights(ag.critic, os.path.join(directory, f"critic_{i}.json"))
    manifest = {
        "m_a": len(result.agents),
        "delta": result.directions.delta,
        "direction_codebook": result.directions.spec(),
        "normalization": {
            "h_scale": result.normalization.h_scale,
            "q_scale": result.normalization.q_scale,
            "a_scale": result.normalization.a_scale,
        },
        "hidden": list(hidden),
    }
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_checkpoint(directory):
    """Rebuild (agents, directions, normalization) from a checkpoint directory.

    Optimizer states and buffers come back empty; the loaded agents are
    meant for utilization, not resumed training.
    """
    path = os.path.join(directory, "manifest.json")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"no checkpoint manifest at {path}") from None
    norm = Normalization(**manifest["normalization"])
    directions = DirectionCodebook.from_spec(manifest["direction_codebook"])
    agents = []
    for i in range(1, manifest["m_a"] + 1):
        actor = neural.load_weights(os.path.join(directory, f"actor_{i}.json"))
        critic = neural.load_weights(os.path.join(directory, f"critic_{i}.json"))
        agents.append(DdpgAgent(actor, critic, gamma=0.99, tau=0.001,
                                lr_actor=1e-4, lr_critic=1e-3, buffer_capacity=1))
    return agents, directions, norm
