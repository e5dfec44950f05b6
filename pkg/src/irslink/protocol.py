"""Codebook sounding, selection, and protocol-overhead accounting.

One coherence block of length T_c runs three steps: the IRS applies each of
the M candidate codewords while the UE sounds (M reconfigurations), the BS
selects the codeword with the highest instantaneous rate, and the selection
(plus, for the learned schemes, one direction index per codeword) is fed
back over a control channel of spectral efficiency r_feedback.  Data flows
in the remaining T_c - T_p seconds.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import channel, metaatom
from .errors import ConfigurationError, ProtocolInfeasibleError

SCHEMES = ("rvq", "ra", "sdpic", "mdpic")


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, noise power, and bandwidth in linear units."""

    p: float        # transmit power, W
    sigma2: float   # noise power, W
    w: float        # bandwidth, Hz

    def __post_init__(self):
        if not (self.p > 0 and self.sigma2 > 0 and self.w > 0):
            raise ConfigurationError(
                f"power, noise and bandwidth must be positive, got {self}"
            )


@dataclass(frozen=True)
class Timings:
    """Protocol timing constants, seconds (r_feedback in bits/s/Hz)."""

    t_c: float
    t_reconf: float
    r_feedback: float

    def __post_init__(self):
        if not (self.t_c > 0 and self.t_reconf > 0 and self.r_feedback > 0):
            raise ConfigurationError(f"timing constants must be positive, got {self}")
        if self.t_c <= self.t_reconf:
            raise ConfigurationError(
                f"coherence time {self.t_c} must exceed reconfiguration time {self.t_reconf}"
            )


@dataclass(frozen=True)
class BlockResult:
    """Outcome of one coherence block."""

    selected_index: int      # 1-based position of the winning codeword
    rate: float              # instantaneous rate of the winner, bits/s
    overhead: float          # T_p, seconds
    effective_rate: float    # duty-cycled rate, bits/s
    feedback_bits: int


def data_rate(h_eff: np.ndarray, budget: LinkBudget):
    """Instantaneous rate W*log2(1 + P*||h_eff||^2 / sigma2), bits/s.

    Accepts a single channel (N_BS,) or a batch (M, N_BS).
    """
    h = np.asarray(h_eff)
    power = np.sum(np.abs(h) ** 2, axis=-1)
    rate = budget.w * np.log2(1.0 + budget.p * power / budget.sigma2)
    return rate if np.ndim(rate) else float(rate)


def sound_and_select(codebook: np.ndarray, state: channel.ChannelState,
                     profile: metaatom.CircuitProfile, budget: LinkBudget):
    """Sound every codeword and pick the rate-maximizing one.

    Returns (selected_index 1-based, rates array).  Ties resolve to the
    lowest index; sounding order is codebook order.
    """
    codebook = np.atleast_2d(np.asarray(codebook, dtype=float))
    if codebook.shape[0] < 1:
        raise ConfigurationError("codebook must contain at least one codeword")
    h = channel.effective_channels(state, codebook, profile)
    rates = data_rate(h, budget)
    return int(np.argmax(rates)) + 1, rates


def feedback_bits(scheme: str, m: int, k: int | None = None) -> int:
    """Feedback payload per block, bits.

    rvq/ra feed back only the selected index: ceil(log2 M).  The learned
    schemes add one direction index per codeword: ceil(log2 M) + M*ceil(log2 K).
    """
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if m < 1:
        raise ConfigurationError(f"codebook size M must be >= 1, got {m}")
    bits = (m - 1).bit_length()  # exact ceil(log2 m)
    if scheme in ("sdpic", "mdpic"):
        if k is None or k < 1:
            raise ConfigurationError(f"direction codebook size K must be >= 1, got {k!r}")
        bits += m * (k - 1).bit_length()
    return bits


def time_overhead(scheme: str, m: int, timings: Timings, w: float,
                  k: int | None = None, final_reconf_needed: bool = True) -> float:
    """Per-block protocol time T_p = M*T_reconf + T_feedback + T_final.

    T_feedback = bits / (W * r_feedback).  T_final is one extra
    reconfiguration unless the winner was the last codeword sounded.
    Raises ProtocolInfeasibleError when T_p would fill the whole block.
    """
    bits = feedback_bits(scheme, m, k)
    t_p = m * timings.t_reconf + bits / (w * timings.r_feedback)
    if final_reconf_needed:
        t_p += timings.t_reconf
    if t_p >= timings.t_c:
        raise ProtocolInfeasibleError(
            f"protocol overhead {t_p:.6g} s with M={m} does not fit in "
            f"coherence time {timings.t_c:.6g} s"
        )
    return t_p


def effective_rate(h_eff: np.ndarray, budget: LinkBudget, t_c: float, t_p: float) -> float:
    """Duty-cycled rate ((T_c - T_p)/T_c) * data_rate, bits/s."""
    if t_p >= t_c:
        warnings.warn(f"overhead {t_p:.6g} s consumes the whole block, rate is zero")
        return 0.0
    return (t_c - t_p) / t_c * data_rate(h_eff, budget)


def run_block(codebook: np.ndarray, state: channel.ChannelState,
              profile: metaatom.CircuitProfile, budget: LinkBudget,
              timings: Timings, scheme: str, k: int | None = None) -> BlockResult:
    """Execute one coherence block: sound, select, account overhead."""
    codebook = np.atleast_2d(np.asarray(codebook, dtype=float))
    m = codebook.shape[0]
    selected, rates = sound_and_select(codebook, state, profile, budget)
    bits = feedback_bits(scheme, m, k)
    t_p = time_overhead(scheme, m, timings, budget.w, k,
                        final_reconf_needed=(selected != m))
    rate = float(rates[selected - 1])
    eff = (timings.t_c - t_p) / timings.t_c * rate
    return BlockResult(selected_index=selected, rate=rate, overhead=t_p,
                       effective_rate=eff, feedback_bits=bits)
