"""Deterministic named RNG substreams.

Every stochastic component (channel evolution, codebook draws, exploration
noise, weight init, replay sampling) pulls from its own generator so that
adding draws to one component never perturbs another.  A substream is fully
determined by (master seed, stream name, index): the name is folded to a
32-bit tag with crc32, which is stable across platforms and Python runs,
and the triple seeds a SeedSequence.
"""
import zlib

import numpy as np


def substream(master_seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Derive an independent Generator for (master_seed, name, index)."""
    tag = zlib.crc32(name.encode("utf8"))
    seq = np.random.SeedSequence([int(master_seed), tag, int(index)])
    return np.random.default_rng(seq)
