"""
Spectrum Sensing - Signal Model
Noise-only (H0) and signal-plus-noise (H1) sample frames, Rayleigh SNR draws,
and the counter-based RNG every simulation draws from.

Samples are real Gaussians. The primary signal is modelled as a zero-mean
Gaussian of power P, so the energy of an N-sample frame is exactly a scaled
chi-square with N degrees of freedom under either hypothesis.
"""

import math
import os
import sys
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from errors import DomainError


# ============================================================
# Types
# ============================================================

class Hypothesis(str, Enum):
    H0 = "H0"  # noise only
    H1 = "H1"  # signal plus noise


class Fading(str, Enum):
    CONSTANT = "constant"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class ChannelSpec:
    """One secondary user's sensing channel."""

    snr_db: float
    noise_power: float = 4.0
    fading: Fading = Fading.CONSTANT
    mean_snr: float = None  # Rayleigh mean (linear); defaults to the snr_db value

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise DomainError(f"snr_db must be finite, got {self.snr_db}")
        if not self.noise_power > 0:
            raise DomainError(f"noise_power must be > 0, got {self.noise_power}")
        object.__setattr__(self, "fading", Fading(self.fading))
        if self.fading is Fading.RAYLEIGH:
            if self.mean_snr is None:
                object.__setattr__(self, "mean_snr", self.snr_linear)
            if not self.mean_snr > 0:
                raise DomainError(f"mean_snr must be > 0, got {self.mean_snr}")

    @property
    def snr_linear(self):
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def signal_power(self):
        """Average signal power P = sigma_n^2 * SNR."""
        if self.fading is Fading.RAYLEIGH:
            return self.noise_power * self.mean_snr
        return self.noise_power * self.snr_linear

    def draw_signal_power(self, rng):
        """Signal power for one trial; Rayleigh channels draw a fresh SNR."""
        if self.fading is Fading.RAYLEIGH:
            return sample_rayleigh_snr(self.mean_snr, rng) * self.noise_power
        return self.signal_power


@dataclass(frozen=True)
class SampleFrame:
    samples: np.ndarray = field(repr=False)
    hypothesis: Hypothesis

    def __len__(self):
        return len(self.samples)


class SeededRng:
    """
    Deterministic counter-based generator (numpy Philox).

    The key is derived from (seed, stream) through SeedSequence, so distinct
    stream ids such as (trial_index, channel_index) give independent streams
    that can be generated in any order or on any thread.
    """

    def __init__(self, seed, stream=()):
        if isinstance(stream, int):
            stream = (stream,)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = tuple(int(s) for s in stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def normal(self, scale, size):
        return self._gen.normal(0.0, scale, size)

    def exponential(self, scale):
        return float(self._gen.exponential(scale))

    def random(self, size=None):
        if size is None:
            return float(self._gen.random())
        return self._gen.random(size)

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


# ============================================================
# Generators
# ============================================================

def _check_count(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"sample count must be a positive integer, got {n}")
    return int(n)


def _check_power(name, value):
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be > 0, got {value}")


def generate_noise(n, noise_power, rng):
    """n i.i.d. N(0, noise_power) samples tagged H0."""
    n = _check_count(n)
    _check_power("noise_power", noise_power)
    samples = rng.normal(math.sqrt(noise_power), n)
    return SampleFrame(samples, Hypothesis.H0)


def generate_signal_plus_noise(n, signal_power, noise_power, rng, noise=None):
    """
    n samples of Gaussian signal (power signal_power) plus noise, tagged H1.

    When `noise` is given its samples are reused as the noise component, which
    pairs an H1 frame with the H0 frame of the same repetition.
    """
    n = _check_count(n)
    _check_power("signal_power", signal_power)
    _check_power("noise_power", noise_power)
    if noise is None:
        noise_samples = rng.normal(math.sqrt(noise_power), n)
    else:
        if len(noise) != n:
            raise DomainError(f"noise frame has {len(noise)} samples, expected {n}")
        noise_samples = noise.samples
    signal = rng.normal(math.sqrt(signal_power), n)
    return SampleFrame(signal + noise_samples, Hypothesis.H1)


def sample_rayleigh_snr(mean_snr, rng):
    """One instantaneous SNR from f(g) = exp(-g/mean)/mean, g >= 0."""
    if not (math.isfinite(mean_snr) and mean_snr > 0):
        raise DomainError(f"mean_snr must be > 0, got {mean_snr}")
    return rng.exponential(mean_snr)
