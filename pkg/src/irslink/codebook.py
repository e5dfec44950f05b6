"""Codebook construction and per-block update rules.

Three families: a random vector quantization (RVQ) baseline whose entries
are redrawn i.i.d. Uniform(C_min, C_max) every block, a random-adjacency
(RA) update that scatters the next codebook around the last winner, and the
learned direction-codebook update where each codeword moves by a quantized
policy step.  Codewords are rows of an (M, N_G) array of capacitances in
farads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .metaatom import CapacitanceBounds
from .seeding import substream


@dataclass(frozen=True)
class StepSizes:
    """Update half-widths derived from the capacitance range, farads.

    ra: RA perturbation half-width (range/5).
    dpic: direction-codebook half-width, also the policy's action bound
    (range/4).
    """

    ra: float
    dpic: float

    @classmethod
    def from_bounds(cls, bounds: CapacitanceBounds) -> "StepSizes":
        span = bounds.c_max - bounds.c_min
        return cls(ra=span / 5.0, dpic=span / 4.0)


class DirectionCodebook:
    """K direction vectors d_k i.i.d. Uniform(-delta, delta)^dims, farads.

    Fixed after construction and shared by UE and IRS; (seed, k, dims,
    delta) reconstructs it bitwise.  Entries are write-protected so a
    stray in-place edit fails loudly.
    """

    def __init__(self, seed: int, k: int, dims: int, delta: float):
        if k < 1 or dims < 1:
            raise ConfigurationError(f"need k >= 1 and dims >= 1, got k={k}, dims={dims}")
        if delta <= 0:
            raise ConfigurationError(f"direction half-width must be positive, got {delta}")
        self.seed = int(seed)
        self.k = int(k)
        self.dims = int(dims)
        self.delta = float(delta)
        rng = substream(self.seed, "direction-codebook")
        entries = rng.uniform(-delta, delta, size=(k, dims))
        entries.setflags(write=False)
        self.entries = entries

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, index: int) -> np.ndarray:
        return self.entries[index]

    def spec(self) -> dict:
        """Parameters sufficient to reconstruct the codebook bitwise."""
        return {"seed": self.seed, "size": self.k, "dims": self.dims, "delta": self.delta}

    @classmethod
    def from_spec(cls, spec: dict) -> "DirectionCodebook":
        return cls(seed=spec["seed"], k=spec["size"], dims=spec["dims"], delta=spec["delta"])


def rvq_codebook(m: int, dims: int, bounds: CapacitanceBounds,
                 rng: np.random.Generator) -> np.ndarray:
    """M codewords with entries i.i.d. Uniform(c_min, c_max), shape (M, dims)."""
    if m < 1 or dims < 1:
        raise ConfigurationError(f"need m >= 1 and dims >= 1, got m={m}, dims={dims}")
    return rng.uniform(bounds.c_min, bounds.c_max, size=(m, dims))


def ra_update(q_star: np.ndarray, m: int, delta: float, bounds: CapacitanceBounds,
              rng: np.random.Generator) -> np.ndarray:
    """Next RA codebook: clip(q_star + z_m) with z entries Uniform(-delta, delta).

    Every codeword is re-scattered around the winner, so the codebook stays
    inside the capacitance box by construction.
    """
    q_star = np.asarray(q_star, dtype=float)
    if m < 1:
        raise ConfigurationError(f"codebook size must be >= 1, got {m}")
    if delta <= 0:
        raise ConfigurationError(f"RA half-width must be positive, got {delta}")
    noise = rng.uniform(-delta, delta, size=(m, q_star.size))
    return bounds.clip(q_star[None, :] + noise)


def dpic_apply(q: np.ndarray, direction: np.ndarray, bounds: CapacitanceBounds):
    """Apply one direction step: clip(q + d) and count clipped entries.

    Returns (next_q, n_clip) where n_clip counts entries strictly outside
    the bounds before clipping; boundary hits do not count.
    """
    q = np.asarray(q, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if q.shape != direction.shape:
        raise ConfigurationError(
            f"codeword shape {q.shape} != direction shape {direction.shape}"
        )
    raw = q + direction
    n_clip = int(np.count_nonzero((raw < bounds.c_min) | (raw > bounds.c_max)))
    return bounds.clip(raw), n_clip
