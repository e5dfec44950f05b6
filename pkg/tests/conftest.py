"""Shared builders for protocol/agent/harness tests."""
import numpy as np

from irslink.channel import ChannelModel, ChannelState, PathSet, complex_gaussian
from irslink.metaatom import CircuitProfile


def make_channel_state(rng, n_bs=2, n_irs=8, n_paths=4):
    """Synthetic channel state with O(1) entries; no geometry semantics."""
    model = ChannelModel(n_bs=n_bs, n_irs=n_irs, n_paths=n_paths)
    return ChannelState(
        h_ub=complex_gaussian(n_bs, rng),
        H_ib=complex_gaussian((n_bs, n_irs), rng),
        ui_mat=complex_gaussian((n_paths, n_irs), rng),
        ub_paths=PathSet(gains=complex_gaussian(n_paths, rng),
                         aoa_deg=rng.uniform(-90, 90, n_paths)),
        ib_paths=PathSet(gains=complex_gaussian(n_paths, rng),
                         aoa_deg=rng.uniform(-90, 90, n_paths),
                         aod_deg=rng.uniform(-90, 90, n_paths)),
        ui_paths=PathSet(gains=complex_gaussian(n_paths, rng),
                         aoa_deg=rng.uniform(0, 90, n_paths)),
        pl_ub=1.0, pl_ib=1.0, pl_ui=1.0,
        ue_pos=np.array([100.0, 0.0]), model=model)


def make_angle_profile():
    """Three-sample profile so angle interpolation is exercised."""
    return CircuitProfile(theta_deg=np.array([0.0, 45.0, 90.0]),
                          l_t=np.array([1.0e-9, 1.2e-9, 1.6e-9]),
                          c_t=np.array([0.7e-12, 0.75e-12, 0.85e-12]),
                          r_t=np.array([1.0, 1.3, 2.0]),
                          l_b=np.array([1.5e-9, 1.7e-9, 2.1e-9]))
