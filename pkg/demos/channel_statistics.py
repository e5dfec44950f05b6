"""Fading memory, path loss, and the composed uplink channel.

The link has three pieces: a direct user-to-basestation path, a
basestation-facing surface, and the user-to-surface scatter.  The small-scale
gains evolve as a first-order Gauss-Markov process with memory rho, the
surface-to-basestation link is Rician, and large-scale losses follow a
log-distance law.  This script measures those statistics from simulated
trajectories and compares them against the closed forms.

Run:  python3 demos/channel_statistics.py
"""
import warnings

import numpy as np

from irslink.channel import (ChannelModel, Geometry, effective_channel,
                             evolve, path_loss, sample_initial)
from irslink.metaatom import default_profile

WAVELENGTH = 3e8 / 5.195e9


def make_geometry(ue_pos=(100.0, 0.0), speed=0.0):
    return Geometry(bs_pos=[0.0, 0.0], irs_pos=[90.0, 30.0],
                    ue_pos=list(ue_pos), ue_speed=speed, ue_heading=0.0,
                    d_bs=WAVELENGTH / 2.0, d_irs=WAVELENGTH / 10.0,
                    wavelength=WAVELENGTH)


def main():
    print("=== Large scale: log-distance path loss")
    print(f"{'d [m]':>6} {'exp=2.0':>12} {'exp=3.75':>12}")
    for d in (1.0, 5.0, 20.0, 90.0, 250.0):
        print(f"{d:6.0f} {path_loss(d, 2.0, WAVELENGTH):12.3e} "
              f"{path_loss(d, 3.75, WAVELENGTH):12.3e}")
    print("below the 1 m reference the loss clamps (and warns once):")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        clamped = path_loss(0.3, 2.0, WAVELENGTH)
    print(f"  path_loss(0.3 m) = {clamped:.3e} = path_loss(1 m); "
          f"warned: {caught[0].category.__name__}")

    print("\n=== Small scale: Gauss-Markov memory vs rho")
    geom = make_geometry()
    n = 4000
    for rho in (0.5, 0.9, 0.95, 0.99):
        model = ChannelModel(n_bs=1, n_irs=1, n_paths=10, rho=rho)
        rng = np.random.default_rng(7)
        st = sample_initial(model, geom, rng)
        series = np.empty((10, n), dtype=complex)
        for t in range(n):
            st = evolve(st, geom, 5e-3, rng)
            series[:, t] = st.ub_paths.gains
        re = series.real
        lag = np.mean([np.corrcoef(re[i, :-1], re[i, 1:])[0, 1]
                       for i in range(10)])
        var = series.var()
        print(f"  rho={rho:4.2f}: measured lag-1 corr {lag:6.3f} "
              f"(theory {rho:4.2f}), stationary var {var:5.3f} (theory 1)")
    print("a walking user at 0.3 km/h and a 5 ms block corresponds to "
          "J0(2 pi f_D T_c) ~ 0.996,\nso rho near 0.99 matches pedestrian "
          "motion at 5.195 GHz")

    print("\n=== Composition: direct link vs surface contribution")
    model = ChannelModel(n_bs=2, n_irs=40, n_paths=10, rho=0.99)
    profile = default_profile()
    rng = np.random.default_rng(11)
    for label, pos in (("far from surface (100, 0)", (100.0, 0.0)),
                       ("next to surface (91.2, 28.2)", (91.2, 28.2))):
        geom = make_geometry(ue_pos=pos)
        direct = np.empty(200)
        spread = np.empty(200)
        st = sample_initial(model, geom, rng)
        for i in range(200):
            st = evolve(st, geom, 5e-3, rng)
            h = effective_channel(st, np.full(4, 0.8e-12), profile)
            direct[i] = np.sum(np.abs(st.h_ub) ** 2)
            spread[i] = np.sum(np.abs(h - st.h_ub) ** 2)
        print(f"  {label}: mean |cascade|^2 / |direct|^2 = "
              f"{spread.mean() / direct.mean():.3f}")
    print("with a 40-element surface the cascade only competes with the "
          "direct path\nwhen the user stands near the surface, which is why "
          "the desk-scale scenario\nplaces the user disc there")


if __name__ == "__main__":
    main()
