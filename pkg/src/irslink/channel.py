"""Geometric multi-path uplink channels with block-fading evolution.

Three links are modeled: UE-BS (direct), UE-IRS, and IRS-BS.  The direct
and UE-IRS links are pure NLoS sums of L paths; the IRS-BS link is Rician
with a geometry-derived LoS dyad.  Large-scale gain follows log-distance
path loss referenced to d0 = 1 m, small-scale gains evolve as a Gauss-Markov
process, and path angles drift a little every coherence block.

Conventions: both arrays are ULAs in the xy-plane.  The BS array normal
points along +x and the IRS array normal along -x; angles are measured from
the normal via atan2 and are positive counter-clockwise.  Only the IRS-BS
LoS dyad uses geometric angles.  The UE-IRS path angles double as the
incident angles of the angle-dependent meta-atom response, which is why
they are drawn from [0, 90] degrees.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import metaatom

REFERENCE_DISTANCE = 1.0  # path-loss reference d0, meters


@dataclass(frozen=True)
class Geometry:
    """Node placement and array layout. Positions are 2-D, meters."""

    bs_pos: np.ndarray
    irs_pos: np.ndarray
    ue_pos: np.ndarray
    ue_speed: float        # m/s
    ue_heading: float      # radians
    d_bs: float            # BS element spacing, meters
    d_irs: float           # IRS element spacing, meters
    wavelength: float      # meters

    def __post_init__(self):
        for name in ("bs_pos", "irs_pos", "ue_pos"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass
class PathSet:
    """Small-scale parameters of one link's NLoS paths.

    gains are unit-variance complex factors; aoa_deg holds the arrival-side
    angle of each path (for the UE-IRS link this is the incident angle at
    the surface), aod_deg the departure side for dyadic links.
    """

    gains: np.ndarray
    aoa_deg: np.ndarray
    aod_deg: np.ndarray | None = None

    @property
    def count(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class ChannelModel:
    """Static propagation parameters."""

    n_bs: int
    n_irs: int
    n_paths: int = 10
    rician_k: float = 5.0
    ple_ub: float = 3.75
    ple_ib: float = 2.0
    ple_ui: float = 2.2
    rho: float = 0.95
    angle_drift_deg: float = 0.1


@dataclass
class ChannelState:
    """One realization of all three links plus what evolution needs."""

    h_ub: np.ndarray       # (N_BS,) direct channel
    H_ib: np.ndarray       # (N_BS, N_IRS) IRS-BS channel
    ui_mat: np.ndarray     # (L, N_IRS) per-path UE-IRS rows, gain included
    ub_paths: PathSet
    ib_paths: PathSet
    ui_paths: PathSet
    pl_ub: float
    pl_ib: float
    pl_ui: float
    ue_pos: np.ndarray     # current UE position, meters
    model: ChannelModel

    @property
    def rho(self) -> float:
        return self.model.rho


def array_response(n: int, spacing: float, angle_deg, wavelength: float) -> np.ndarray:
    """ULA response a_k = exp(-j*2*pi*k*spacing*sin(angle)/wavelength).

    Scalar angle gives shape (n,), an (L,) angle vector gives (L, n).
    """
    k = np.arange(n)
    angle = np.deg2rad(np.asarray(angle_deg, dtype=float))
    phase = -2j * np.pi * spacing * np.sin(angle)[..., None] * k / wavelength
    return np.exp(phase)


def path_loss(distance: float, ple: float, wavelength: float,
              d0: float = REFERENCE_DISTANCE) -> float:
    """Log-distance power path loss (wavelength/(4 pi d0))^2 * (d0/d)^ple.

    Distances below d0 are clamped to d0 with a warning so the model never
    produces gain above the reference point.
    """
    if distance < d0:
        warnings.warn(f"distance {distance:.3g} m below reference {d0} m, clamping")
        distance = d0
    return (wavelength / (4.0 * np.pi * d0)) ** 2 * (d0 / distance) ** ple


def complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _bearing_deg(origin, target, normal) -> float:
    """Signed angle of (target - origin) measured from the array normal."""
    d = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    n = np.asarray(normal, dtype=float)
    cross = n[0] * d[1] - n[1] * d[0]
    dot = n[0] * d[0] + n[1] * d[1]
    return float(np.degrees(np.arctan2(cross, dot)))


BS_NORMAL = np.array([1.0, 0.0])
IRS_NORMAL = np.array([-1.0, 0.0])


def _compose(model: ChannelModel, geom: Geometry, ue_pos: np.ndarray,
             ub: PathSet, ib: PathSet, ui: PathSet) -> ChannelState:
    """Rebuild channel arrays from path parameters and current positions."""
    lam = geom.wavelength
    d_ub = float(np.linalg.norm(ue_pos - geom.bs_pos))
    d_ib = float(np.linalg.norm(geom.irs_pos - geom.bs_pos))
    d_ui = float(np.linalg.norm(ue_pos - geom.irs_pos))
    pl_ub = path_loss(d_ub, model.ple_ub, lam)
    pl_ib = path_loss(d_ib, model.ple_ib, lam)
    pl_ui = path_loss(d_ui, model.ple_ui, lam)
    L = model.n_paths

    # Direct link: sum of NLoS BS responses.
    a_bs = array_response(model.n_bs, geom.d_bs, ub.aoa_deg, lam)  # (L, N_BS)
    h_ub = np.sqrt(pl_ub / L) * (ub.gains[:, None] * a_bs).sum(axis=0)

    # IRS-BS link: Rician mix of a geometric LoS dyad and NLoS dyads.
    aoa_los = _bearing_deg(geom.bs_pos, geom.irs_pos, BS_NORMAL)
    aod_los = _bearing_deg(geom.irs_pos, geom.bs_pos, IRS_NORMAL)
    los = np.outer(array_response(model.n_bs, geom.d_bs, aoa_los, lam),
                   array_response(model.n_irs, geom.d_irs, aod_los, lam))
    a_rx = array_response(model.n_bs, geom.d_bs, ib.aoa_deg, lam)    # (L, N_BS)
    a_tx = array_response(model.n_irs, geom.d_irs, ib.aod_deg, lam)  # (L, N_IRS)
    nlos = np.einsum("l,ln,li->ni", ib.gains / np.sqrt(L), a_rx, a_tx)
    k = model.rician_k
    H_ib = np.sqrt(pl_ib) * (np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos)

    # UE-IRS link: one row per path; the incident angle is reused by the
    # meta-atom model, so rows are kept separate instead of pre-summed.
    a_irs = array_response(model.n_irs, geom.d_irs, ui.aoa_deg, lam)  # (L, N_IRS)
    ui_mat = np.sqrt(pl_ui / L) * ui.gains[:, None] * a_irs

    return ChannelState(
        h_ub=h_ub, H_ib=H_ib, ui_mat=ui_mat,
        ub_paths=ub, ib_paths=ib, ui_paths=ui,
        pl_ub=pl_ub, pl_ib=pl_ib, pl_ui=pl_ui,
        ue_pos=np.asarray(ue_pos, dtype=float).copy(), model=model,
    )


def sample_initial(model: ChannelModel, geom: Geometry, rng: np.random.Generator) -> ChannelState:
    """Draw an independent initial realization of all three links.

    Angles: generic NLoS angles are Uniform(-90, 90); UE-IRS incident
    angles are Uniform(0, 90) so they stay inside the meta-atom profile's
    domain.  Gains are unit-variance complex Gaussian.
    """
    L = model.n_paths
    ub = PathSet(gains=complex_gaussian(L, rng), aoa_deg=rng.uniform(-90.0, 90.0, L))
    ib = PathSet(gains=complex_gaussian(L, rng), aoa_deg=rng.uniform(-90.0, 90.0, L),
                 aod_deg=rng.uniform(-90.0, 90.0, L))
    ui = PathSet(gains=complex_gaussian(L, rng), aoa_deg=rng.uniform(0.0, 90.0, L))
    return _compose(model, geom, geom.ue_pos, ub, ib, ui)


def _evolve_gains(gains: np.ndarray, rho: float, rng: np.random.Generator) -> np.ndarray:
    return rho * gains + np.sqrt(1.0 - rho * rho) * complex_gaussian(gains.shape, rng)


def evolve(state: ChannelState, geom: Geometry, dt: float,
           rng: np.random.Generator) -> ChannelState:
    """Advance one coherence block.

    Gains follow beta <- rho*beta + sqrt(1-rho^2)*w; every NLoS angle gets
    an independent Uniform(-drift, drift) perturbation (UE-IRS incident
    angles clamped back into [0, 90]); the UE advances ue_speed*dt along its
    heading; path losses and the LoS dyad are recomputed from the new
    positions.  Draw order is fixed (gains ub/ib/ui, then angles ub, ib
    arrival, ib departure, ui) so trajectories are bit-reproducible.
    """
    m = state.model
    rho, drift = m.rho, m.angle_drift_deg
    g_ub = _evolve_gains(state.ub_paths.gains, rho, rng)
    g_ib = _evolve_gains(state.ib_paths.gains, rho, rng)
    g_ui = _evolve_gains(state.ui_paths.gains, rho, rng)
    L = m.n_paths
    ub = PathSet(gains=g_ub, aoa_deg=state.ub_paths.aoa_deg + rng.uniform(-drift, drift, L))
    ib = PathSet(gains=g_ib,
                 aoa_deg=state.ib_paths.aoa_deg + rng.uniform(-drift, drift, L),
                 aod_deg=state.ib_paths.aod_deg + rng.uniform(-drift, drift, L))
    ui_angles = np.clip(state.ui_paths.aoa_deg + rng.uniform(-drift, drift, L), 0.0, 90.0)
    ui = PathSet(gains=g_ui, aoa_deg=ui_angles)
    step = geom.ue_speed * dt * np.array([np.cos(geom.ue_heading), np.sin(geom.ue_heading)])
    return _compose(m, geom, state.ue_pos + step, ub, ib, ui)


def effective_channels(state: ChannelState, codewords: np.ndarray,
                       profile: metaatom.CircuitProfile) -> np.ndarray:
    """Effective uplink channels for a batch of codewords, shape (M, N_BS).

    h_eff = h_ub + H_ib @ sum_l diag(Gamma(q, theta_l)) h_ui_l, with one
    incident angle per UE-IRS path shared by all meta-atoms (far field).
    """
    q = np.atleast_2d(np.asarray(codewords, dtype=float))          # (M, N_G)
    thetas = state.ui_paths.aoa_deg                                # (L,)
    n_irs = state.H_ib.shape[1]
    n_g = q.shape[1]
    gam = metaatom.reflection_coefficient(q[:, None, :], thetas[None, :, None], profile)
    gam = metaatom.expand_groups(gam, n_irs, n_g)                  # (M, L, N_IRS)
    combined = (gam * state.ui_mat[None, :, :]).sum(axis=1)        # (M, N_IRS)
    return state.h_ub[None, :] + combined @ state.H_ib.T


def effective_channel(state: ChannelState, q: np.ndarray,
                      profile: metaatom.CircuitProfile) -> np.ndarray:
    """Effective uplink channel for a single codeword, shape (N_BS,)."""
    return effective_channels(state, np.asarray(q, dtype=float)[None, :], profile)[0]
