"""Experiment configuration: defaults, JSON round-trip, validation.

The dataclass stores file-facing units (pF, dBm, km/h); linear-unit values
come out of properties so the conversion logic lives in exactly one place.
An empty JSON object loads the full-scale default configuration.  Unknown
keys are rejected so typos cannot silently fall back to defaults.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from . import channel, codebook, metaatom, protocol
from .errors import ConfigurationError

SPEED_OF_LIGHT = 3e8  # m/s


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass
class DirectionCodebookSpec:
    """Seeded construction parameters of the shared direction codebook."""

    seed: int = 7
    size: int = 2048
    delta_pf: float | None = None  # None: (c_max - c_min)/4


@dataclass
class ExperimentConfig:
    # Carrier and protocol timing
    f_hz: float = 5.195e9
    t_c_s: float = 5e-3
    t_reconf_s: float = 100e-6
    r_feedback: float = 0.1        # control-channel spectral efficiency, bits/s/Hz
    # Array and surface dimensions
    n_bs: int = 5
    n_irs: int = 200
    n_g: int = 10                  # independently controlled groups
    # Varactor range (file units: pF)
    c_min_pf: float = 0.4
    c_max_pf: float = 2.7
    # Link budget (file units: dBm)
    p_dbm: float = 20.0
    sigma2_dbm: float = -80.0
    w_hz: float = 10e6
    # Propagation
    rician_k: float = 5.0
    ple_ub: float = 3.75
    ple_ib: float = 2.0
    ple_ui: float = 2.2
    n_paths: int = 10
    rho: float = 0.95
    angle_drift_deg: float = 0.1
    ue_speed_kmh: float = 3.0
    bs_pos: tuple = (0.0, 0.0)
    irs_pos: tuple = (90.0, 30.0)
    ue_center: tuple = (100.0, 0.0)
    ue_radius_m: float = 5.0
    # Codebooks
    m: int = 8                     # deployed codebook size
    m_a: int = 8                   # trained agents / training codebook size
    delta_ra_pf: float | None = None   # None: (c_max - c_min)/5
    direction_codebook: DirectionCodebookSpec = field(default_factory=DirectionCodebookSpec)
    # Learning
    hidden: tuple = (400, 300)
    gamma: float = 0.99
    tau: float = 0.001
    lr_actor: float = 1e-4
    lr_critic: float = 1e-3
    n_batch: int = 32
    buffer_capacity: int = 500_000
    nu: float | None = None        # clip penalty weight, W; None: bandwidth
    noise_is_std: bool = False     # exploration epsilon as std instead of variance
    # Episode structure
    n_episode: int = 1000
    n_timestep: int = 500
    util_episodes: int = 2000
    util_timesteps: int = 30
    ma_window: int = 100
    seed: int = 0
    profile_csv: str | None = None

    def __post_init__(self):
        for name in ("bs_pos", "irs_pos", "ue_center"):
            value = getattr(self, name)
            if len(value) != 2:
                raise ConfigurationError(f"{name} must have two coordinates, got {value!r}")
            setattr(self, name, (float(value[0]), float(value[1])))
        if isinstance(self.direction_codebook, dict):
            self.direction_codebook = _load_section(self.direction_codebook)
        try:
            self.hidden = tuple(int(h) for h in self.hidden)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"hidden must be a list of layer sizes: {exc}") from exc
        self.validate()

    # Derived linear-unit quantities -------------------------------------
    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_hz

    @property
    def c_min(self) -> float:
        return self.c_min_pf * 1e-12

    @property
    def c_max(self) -> float:
        return self.c_max_pf * 1e-12

    @property
    def p_w(self) -> float:
        return dbm_to_watts(self.p_dbm)

    @property
    def sigma2_w(self) -> float:
        return dbm_to_watts(self.sigma2_dbm)

    @property
    def ue_speed_ms(self) -> float:
        return self.ue_speed_kmh / 3.6

    @property
    def delta_ra(self) -> float:
        if self.delta_ra_pf is not None:
            return self.delta_ra_pf * 1e-12
        return (self.c_max - self.c_min) / 5.0

    @property
    def delta_dpic(self) -> float:
        if self.direction_codebook.delta_pf is not None:
            return self.direction_codebook.delta_pf * 1e-12
        return (self.c_max - self.c_min) / 4.0

    # Component factories ------------------------------------------------
    def bounds(self) -> metaatom.CapacitanceBounds:
        return metaatom.CapacitanceBounds(self.c_min, self.c_max)

    def profile(self) -> metaatom.CircuitProfile:
        if self.profile_csv is None:
            return metaatom.default_profile(f=self.f_hz)
        return metaatom.load_profile_csv(self.profile_csv, f=self.f_hz)

    def link_budget(self) -> protocol.LinkBudget:
        return protocol.LinkBudget(p=self.p_w, sigma2=self.sigma2_w, w=self.w_hz)

    def timings(self) -> protocol.Timings:
        return protocol.Timings(t_c=self.t_c_s, t_reconf=self.t_reconf_s,
                                r_feedback=self.r_feedback)

    def channel_model(self) -> channel.ChannelModel:
        return channel.ChannelModel(
            n_bs=self.n_bs, n_irs=self.n_irs, n_paths=self.n_paths,
            rician_k=self.rician_k, ple_ub=self.ple_ub, ple_ib=self.ple_ib,
            ple_ui=self.ple_ui, rho=self.rho, angle_drift_deg=self.angle_drift_deg)

    def make_geometry(self, rng: np.random.Generator) -> channel.Geometry:
        """Geometry with the UE placed uniformly in its disc, random heading."""
        radius = self.ue_radius_m * np.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * np.pi)
        ue = np.asarray(self.ue_center) + radius * np.array([np.cos(phi), np.sin(phi)])
        heading = rng.uniform(0.0, 2.0 * np.pi)
        return self.geometry_at(ue, heading)

    def geometry_at(self, ue_pos, heading: float = 0.0) -> channel.Geometry:
        return channel.Geometry(
            bs_pos=np.asarray(self.bs_pos), irs_pos=np.asarray(self.irs_pos),
            ue_pos=np.asarray(ue_pos), ue_speed=self.ue_speed_ms,
            ue_heading=float(heading), d_bs=self.wavelength / 2.0,
            d_irs=self.wavelength / 10.0, wavelength=self.wavelength)

    def direction_codebook_obj(self) -> codebook.DirectionCodebook:
        return codebook.DirectionCodebook(
            seed=self.direction_codebook.seed, k=self.direction_codebook.size,
            dims=self.n_g, delta=self.delta_dpic)

    # Validation and serialization ---------------------------------------
    def validate(self) -> None:
        if self.c_min_pf >= self.c_max_pf:
            raise ConfigurationError(
                f"c_min_pf={self.c_min_pf} must be below c_max_pf={self.c_max_pf}"
            )
        positive = ["f_hz", "t_c_s", "t_reconf_s", "r_feedback", "w_hz", "c_min_pf",
                    "rician_k", "n_paths", "ue_radius_m", "tau", "gamma",
                    "lr_actor", "lr_critic", "n_batch", "buffer_capacity",
                    "n_episode", "n_timestep", "util_episodes", "util_timesteps",
                    "ma_window"]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("n_bs", "n_irs", "n_g", "m", "m_a"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_irs % self.n_g != 0:
            raise ConfigurationError(
                f"n_irs={self.n_irs} must be divisible by n_g={self.n_g}"
            )
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigurationError(f"rho must lie in [0, 1], got {self.rho}")
        if self.angle_drift_deg < 0 or self.ue_speed_kmh < 0:
            raise ConfigurationError("drift and speed must be non-negative")
        if self.t_reconf_s * max(self.m, self.m_a) >= self.t_c_s:
            raise ConfigurationError(
                f"t_reconf_s={self.t_reconf_s} times M={max(self.m, self.m_a)} "
                f"does not fit in t_c_s={self.t_c_s}"
            )
        if self.direction_codebook.size < 1:
            raise ConfigurationError("direction codebook size must be >= 1")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigurationError(f"hidden sizes must be positive, got {self.hidden}")

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            elif isinstance(value, DirectionCodebookSpec):
                value = dataclasses.asdict(value)
            out[f.name] = value
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _load_section(data: dict) -> DirectionCodebookSpec:
    known = {f.name for f in dataclasses.fields(DirectionCodebookSpec)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(
            f"unknown direction_codebook keys: {sorted(unknown)}"
        )
    return DirectionCodebookSpec(**data)


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigurationError(f"config root must be an object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    for name in ("bs_pos", "irs_pos", "ue_center", "hidden"):
        if name in kwargs and isinstance(kwargs[name], list):
            kwargs[name] = tuple(kwargs[name])
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    """Load a JSON config; an empty object means all defaults."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    return from_dict(data)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)


def desk_config() -> ExperimentConfig:
    """Laptop-scale configuration: small arrays, small networks, short runs.

    Keeps the full-scale physics and protocol constants but shrinks the
    array, surface, group count, episode counts, and the agent networks so
    a complete train-and-evaluate cycle finishes in minutes.  The UE disc
    sits near the surface: with only 40 elements the aligned cascade is
    otherwise buried under the direct link and no codebook scheme could
    move the rate.  The disc stays far enough out that the shortest
    UE-surface distance over an episode walk never crosses the 1 m
    path-loss reference.  UE speed and the fading memory are set together:
    at 0.3 km/h and a 5 ms block, Clarke's model gives a block-to-block
    correlation of about 0.996, so rho = 0.99 keeps the evolution
    consistent with the walking speed instead of mixing slow motion with
    fast fading.
    """
    return ExperimentConfig(
        n_bs=2, n_irs=40, n_g=4,
        m=8, m_a=2,
        hidden=(64, 48),
        gamma=0.9,
        buffer_capacity=100_000,
        ue_center=(91.2, 28.2), ue_radius_m=0.5,
        rho=0.99, ue_speed_kmh=0.3,
        n_episode=150, n_timestep=100,
        util_episodes=500, util_timesteps=30,
        ma_window=50,
    )
