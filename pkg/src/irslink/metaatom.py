"""Varactor meta-atom reflection physics.

Each reflecting element is modeled by an equivalent circuit: a bottom-layer
inductance L_B in parallel with a series branch made of the top-layer
inductance L_T, a loss resistance R_T, a fixed capacitance C_T, and the
tunable varactor capacitance C.  All four circuit parameters may depend on
the incident angle theta; a profile stores sampled values over theta in
[0, 90] degrees and queries interpolate linearly with constant extrapolation
outside the sampled range.

The element impedance at angular frequency w = 2*pi*f is

    Z(C, theta) = jwL_B * (R_T + jwL_T + 1/(jwC_T) + 1/(jwC))
                  / (jwL_B + R_T + jwL_T + 1/(jwC_T) + 1/(jwC))

and the reflection coefficient against free space is
Gamma = (Z - Z0) / (Z + Z0).  For any passive profile (R_T >= 0) the
magnitude of Gamma never exceeds 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SingularityError

# Impedance of free space, ohms.
Z0_FREE_SPACE = 376.73

# Denominator magnitudes below this are treated as singular, ohms.
SINGULARITY_TOL = 1e-12

PROFILE_COLUMNS = ["theta_deg", "L_T_nH", "C_T_pF", "R_T_ohm", "L_B_nH"]


@dataclass(frozen=True)
class CapacitanceBounds:
    """Tunable-capacitance range of the varactor, farads."""

    c_min: float
    c_max: float

    def __post_init__(self):
        if not (0.0 < self.c_min < self.c_max):
            raise ConfigurationError(
                f"capacitance bounds must satisfy 0 < c_min < c_max, "
                f"got c_min={self.c_min!r}, c_max={self.c_max!r}"
            )

    def clip(self, values: np.ndarray) -> np.ndarray:
        return np.clip(values, self.c_min, self.c_max)


@dataclass(frozen=True)
class CircuitProfile:
    """Angle-sampled equivalent-circuit parameters, SI units.

    Arrays hold one row per sampled incident angle; theta_deg must be
    strictly increasing within [0, 90].  A single sample makes every
    parameter angle-independent through constant extrapolation.
    """

    theta_deg: np.ndarray
    l_t: np.ndarray  # top inductance, H
    c_t: np.ndarray  # fixed capacitance, F
    r_t: np.ndarray  # loss resistance, ohm
    l_b: np.ndarray  # bottom inductance, H
    f: float = 5.195e9  # operating frequency, Hz
    z0: float = Z0_FREE_SPACE

    def __post_init__(self):
        for name in ("theta_deg", "l_t", "c_t", "r_t", "l_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ConfigurationError(f"profile column {name} must be 1-D")
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"profile column {name} contains non-finite values")
            object.__setattr__(self, name, arr)
        n = self.theta_deg.size
        if n == 0:
            raise ConfigurationError("profile needs at least one sampled angle")
        for name in ("l_t", "c_t", "r_t", "l_b"):
            if getattr(self, name).size != n:
                raise ConfigurationError("profile columns must have equal length")
        if np.any(self.theta_deg < 0.0) or np.any(self.theta_deg > 90.0):
            raise ConfigurationError("sampled angles must lie in [0, 90] degrees")
        if n > 1 and np.any(np.diff(self.theta_deg) <= 0.0):
            raise ConfigurationError("sampled angles must be strictly increasing")
        if np.any(self.l_t <= 0) or np.any(self.c_t <= 0) or np.any(self.l_b <= 0):
            raise ConfigurationError("L_T, C_T, L_B must be positive")
        if np.any(self.r_t < 0):
            raise ConfigurationError("R_T must be non-negative")
        if not (self.f > 0 and self.z0 > 0):
            raise ConfigurationError("frequency and reference impedance must be positive")


def default_profile(f: float = 5.195e9) -> CircuitProfile:
    """Built-in angle-independent placeholder profile.

    The values are not measurements; they are chosen so the parallel
    resonance falls near 0.81 pF, inside the varactor range, which gives a
    reflection-phase sweep of about 315 degrees at 5.195 GHz.  Supply a
    measured CSV profile for angle-dependent work.
    """
    return CircuitProfile(
        theta_deg=np.array([0.0]),
        l_t=np.array([1.0e-9]),
        c_t=np.array([0.7e-12]),
        r_t=np.array([1.0]),
        l_b=np.array([1.5e-9]),
        f=f,
    )


def load_profile_csv(path, f: float = 5.195e9, z0: float = Z0_FREE_SPACE) -> CircuitProfile:
    """Read an angle-sampled profile from CSV (pF/nH file units).

    The header must be exactly ``theta_deg,L_T_nH,C_T_pF,R_T_ohm,L_B_nH``.
    Rows must parse as finite floats, angles strictly increasing, no
    duplicates; anything else raises ConfigurationError.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"profile {path}: empty file") from None
        if [h.strip() for h in header] != PROFILE_COLUMNS:
            raise ConfigurationError(
                f"profile {path}: header must be {','.join(PROFILE_COLUMNS)}, "
                f"got {','.join(header)}"
            )
        rows = []
        for i, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(PROFILE_COLUMNS):
                raise ConfigurationError(f"profile {path}: line {i} has {len(row)} fields")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ConfigurationError(f"profile {path}: line {i} is not numeric") from None
            if not all(np.isfinite(v) for v in values):
                raise ConfigurationError(f"profile {path}: line {i} contains non-finite values")
            rows.append(values)
    if not rows:
        raise ConfigurationError(f"profile {path}: no data rows")
    data = np.array(rows, dtype=float)
    theta = data[:, 0]
    if np.any(np.diff(theta) == 0.0):
        raise ConfigurationError(f"profile {path}: duplicate sampled angles")
    if np.any(np.diff(theta) < 0.0):
        raise ConfigurationError(f"profile {path}: sampled angles must be sorted ascending")
    return CircuitProfile(
        theta_deg=theta,
        l_t=data[:, 1] * 1e-9,
        c_t=data[:, 2] * 1e-12,
        r_t=data[:, 3],
        l_b=data[:, 4] * 1e-9,
        f=f,
        z0=z0,
    )


def save_profile_csv(profile: CircuitProfile, path) -> None:
    """Write a profile back to CSV in pF/nH file units."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_COLUMNS)
        for i in range(profile.theta_deg.size):
            writer.writerow([
                repr(float(profile.theta_deg[i])),
                repr(float(profile.l_t[i] / 1e-9)),
                repr(float(profile.c_t[i] / 1e-12)),
                repr(float(profile.r_t[i])),
                repr(float(profile.l_b[i] / 1e-9)),
            ])


def interpolate_profile(profile: CircuitProfile, theta_deg):
    """Circuit parameters (l_t, c_t, r_t, l_b) at the query angle(s).

    Linear interpolation between samples, constant extrapolation beyond the
    sampled range.  Queries at a sampled angle reproduce the stored values
    bitwise.  theta_deg may be a scalar or an array.
    """
    theta = np.asarray(theta_deg, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > 90.0):
        raise ValueError(f"incident angle must lie in [0, 90] degrees, got {theta_deg!r}")
    xp = profile.theta_deg
    return (
        np.interp(theta, xp, profile.l_t),
        np.interp(theta, xp, profile.c_t),
        np.interp(theta, xp, profile.r_t),
        np.interp(theta, xp, profile.l_b),
    )


def impedance(c, theta_deg, profile: CircuitProfile):
    """Element impedance Z(C, theta) in ohms.

    c (farads) and theta_deg broadcast against each other, so a grid can be
    evaluated in one call.  Raises SingularityError when the parallel
    combination's denominator magnitude falls below 1e-12 ohm.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError(f"capacitance must be positive, got {c!r}")
    l_t, c_t, r_t, l_b = interpolate_profile(profile, theta_deg)
    w = 2.0 * np.pi * profile.f
    series = r_t + 1j * w * l_t + 1.0 / (1j * w * c_t) + 1.0 / (1j * w * c)
    shunt = 1j * w * l_b
    den = shunt + series
    bad = np.abs(den) < SINGULARITY_TOL
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        c_bad = np.broadcast_to(c, np.atleast_1d(bad).shape)[tuple(idx)]
        t_bad = np.broadcast_to(np.asarray(theta_deg, dtype=float), np.atleast_1d(bad).shape)[tuple(idx)]
        raise SingularityError(
            f"singular impedance denominator at C={c_bad!r} F, theta={t_bad!r} deg"
        )
    z = shunt * series / den
    return z if z.ndim else complex(z)


def reflection_from_impedance(z, z0: float = Z0_FREE_SPACE):
    """Gamma = (Z - Z0) / (Z + Z0); singular when Z = -Z0."""
    z = np.asarray(z, dtype=complex)
    den = z + z0
    if np.any(np.abs(den) < SINGULARITY_TOL):
        raise SingularityError(f"reflection undefined at Z = -Z0 = {-z0!r} ohm")
    gamma = (z - z0) / den
    return gamma if gamma.ndim else complex(gamma)


def reflection_coefficient(c, theta_deg, profile: CircuitProfile):
    """Reflection coefficient Gamma(C, theta) of one meta-atom."""
    return reflection_from_impedance(impedance(c, theta_deg, profile), profile.z0)


def expand_groups(q: np.ndarray, n_irs: int, n_g: int) -> np.ndarray:
    """Expand a length-N_G group codeword to per-element values.

    Grouping is contiguous: group g drives elements
    g*(n_irs//n_g) .. (g+1)*(n_irs//n_g)-1.
    """
    q = np.asarray(q)
    if n_g <= 0 or n_irs <= 0:
        raise ConfigurationError(f"n_irs={n_irs} and n_g={n_g} must be positive")
    if n_irs % n_g != 0:
        raise ConfigurationError(f"n_irs={n_irs} is not divisible by n_g={n_g}")
    if q.shape[-1] != n_g:
        raise ConfigurationError(f"codeword length {q.shape[-1]} != n_g={n_g}")
    return np.repeat(q, n_irs // n_g, axis=-1)


def reflection_vector(q: np.ndarray, theta_deg: float, profile: CircuitProfile,
                      n_irs: int, n_g: int) -> np.ndarray:
    """Per-element reflection coefficients for one codeword at one angle.

    Gamma is evaluated once per group and repeated, so the result has
    exactly n_g distinct values laid out contiguously.
    """
    gamma = reflection_coefficient(np.asarray(q, dtype=float), theta_deg, profile)
    return expand_groups(np.atleast_1d(gamma), n_irs, n_g)


def gamma_grid(profile: CircuitProfile, c_values: np.ndarray, theta_values: np.ndarray) -> np.ndarray:
    """Complex Gamma on the (theta, C) product grid, shape (n_theta, n_c)."""
    c = np.asarray(c_values, dtype=float)
    theta = np.asarray(theta_values, dtype=float)
    return np.asarray(reflection_coefficient(c[None, :], theta[:, None], profile))


def phase_sweep_deg(profile: CircuitProfile, bounds: CapacitanceBounds,
                    theta_deg: float = 0.0, n: int = 400) -> float:
    """Total unwrapped reflection-phase coverage over the capacitance range."""
    c = np.linspace(bounds.c_min, bounds.c_max, n)
    phase = np.unwrap(np.angle(reflection_coefficient(c, theta_deg, profile)))
    return float(np.degrees(phase.max() - phase.min()))
