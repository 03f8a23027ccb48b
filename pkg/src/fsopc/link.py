"""Transmit-side model: equiprobable OOK bits, Poisson photon counts per slot,
and the mapping between SNR targets and mean count parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkState:
    """Hidden truth for one coherence block: gain, signal and background means."""

    h: float
    n_s: float
    n_b: float

    def __post_init__(self):
        if self.h < 0 or self.n_s < 0 or self.n_b < 0:
            raise ValueError("link-state parameters must be nonnegative")

    @property
    def n_r(self):
        """Effective signal count h * n_s."""
        return self.h * self.n_s


@dataclass(frozen=True)
class ConstantBackground:
    """Background mean count held fixed for every coherence block."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("background mean must be nonnegative")

    @property
    def mean(self):
        return self.value

    def draw(self, rng):
        return self.value


@dataclass(frozen=True)
class UniformBackground:
    """Background mean redrawn uniformly on [lo, hi] once per coherence block."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError("need 0 <= lo <= hi")

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def draw(self, rng):
        return self.lo + (self.hi - self.lo) * rng.random()


@dataclass(frozen=True)
class CoherencePlan:
    """Block structure: slots per coherence block and the background model."""

    l_c: int = 1000
    block_count: int | None = None
    nb_model: object = ConstantBackground(39.0)

    def __post_init__(self):
        if self.l_c < 1:
            raise ValueError("coherence length must be at least one slot")


def generate_block(state, length, rng):
    """Draw one block of equiprobable bits and their Poisson counts.

    Count means are n_r + n_b on mark slots and n_b on space slots; the
    result is a deterministic function of the generator state.
    """
    if length < 1:
        raise ValueError("block length must be >= 1")
    bits = rng.integers(0, 2, size=length, dtype=np.int64)
    lam = state.n_r * bits + state.n_b
    counts = rng.poisson(lam).astype(np.int64)
    return bits, counts


def snr_linear(n_s, n_b, mean_gain=1.0):
    """Received SNR: squared signal mean over total count variance."""
    m = n_s * mean_gain
    return m * m / (2.0 * m + 4.0 * n_b)


def n_s_from_snr(snr, mean_nb):
    """Invert the SNR definition for n_s (unit mean gain): the positive root of
    n_s**2 - 2*snr*n_s - 4*snr*mean_nb = 0."""
    if snr <= 0:
        raise ValueError("SNR must be positive")
    if mean_nb < 0:
        raise ValueError("background mean must be nonnegative")
    return snr + math.sqrt(snr * snr + 4.0 * snr * mean_nb)


def effective_snr(snr, pilots, data):
    """SNR charged for pilot overhead: (pilots + data) / data * snr."""
    if data < 1:
        raise ValueError("data symbol count must be >= 1")
    if pilots < 0:
        raise ValueError("pilot count must be nonnegative")
    return (pilots + data) / data * snr


def db_to_linear(snr_db):
    return 10.0 ** (snr_db / 10.0)


def linear_to_db(snr):
    return 10.0 * math.log10(snr)
