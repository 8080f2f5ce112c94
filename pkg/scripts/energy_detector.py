"""
Spectrum Sensing - Energy Detector
Energy statistic, threshold decision and the closed-form performance of a
single detector.

Threshold conventions
---------------------
DetectorConfig.threshold is expressed in the convention of the statistic:
a raw sum of squares when ``normalized`` is False, a per-sample average when
it is True. The Gaussian-approximation forms work on the per-sample threshold
(``threshold_norm``); the Marcum / incomplete-gamma forms work on the raw sum
(``threshold_raw``) of noise-normalised energy.
"""

import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

sys.path.insert(0, os.path.dirname(__file__))

from errors import DomainError
from special_functions import (
    gaussian_q, gaussian_q_inv, log_reg_lower_gamma, marcum_q, reg_upper_gamma,
)


# ============================================================
# Types
# ============================================================

@dataclass(frozen=True)
class DetectorConfig:
    n_samples: int
    threshold: float
    normalized: bool = False

    def __post_init__(self):
        if isinstance(self.n_samples, bool) or int(self.n_samples) != self.n_samples \
                or self.n_samples < 1:
            raise DomainError(f"n_samples must be a positive integer, got {self.n_samples}")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise DomainError(f"threshold must be > 0, got {self.threshold}")

    @property
    def threshold_raw(self):
        return self.threshold * self.n_samples if self.normalized else self.threshold

    @property
    def threshold_norm(self):
        return self.threshold if self.normalized else self.threshold / self.n_samples

    def with_threshold(self, threshold):
        return replace(self, threshold=threshold)


@dataclass(frozen=True)
class LocalReport:
    decision: int
    energy: float


# ============================================================
# Statistic and decision
# ============================================================

def energy_statistic(frame, config):
    """Sum of |z(n)|^2, divided by N when the config is normalized."""
    samples = getattr(frame, "samples", frame)
    samples = np.asarray(samples)
    if samples.shape[0] != config.n_samples:
        raise DomainError(
            f"frame has {samples.shape[0]} samples, detector expects {config.n_samples}"
        )
    energy = float(np.sum(np.abs(samples) ** 2))
    if config.normalized:
        energy /= config.n_samples
    return energy


def decide(energy, threshold):
    """1 iff energy is strictly above the threshold; ties report idle."""
    return LocalReport(1 if energy > threshold else 0, float(energy))


# ============================================================
# Gaussian approximation
# ============================================================

def pf_gaussian(config, noise_power):
    n = config.n_samples
    spread = math.sqrt(2.0 / n) * noise_power
    return gaussian_q((config.threshold_norm - noise_power) / spread)


def pd_gaussian(config, noise_power, signal_power):
    # Variance (2/N)(P + sigma^2)^2, the H1 spread of the per-sample energy.
    n = config.n_samples
    total = signal_power + noise_power
    spread = math.sqrt(2.0 / n) * total
    return gaussian_q((config.threshold_norm - total) / spread)


def threshold_for_pf(n_samples, noise_power, target_pf, normalized=False):
    """Threshold whose Gaussian-approximation false-alarm rate is target_pf."""
    norm = noise_power * (1.0 + gaussian_q_inv(target_pf) * math.sqrt(2.0 / n_samples))
    return norm if normalized else norm * n_samples


def required_samples(target_pf, target_pd, snr):
    """
    Smallest N meeting both targets under the Gaussian approximation:

        N = 2 [Q^-1(Pf) - Q^-1(Pd)(1 + SNR)]^2 / SNR^2

    rounded up, and never below one sample.
    """
    for name, p in (("target_pf", target_pf), ("target_pd", target_pd)):
        if not (0.0 < p < 1.0):
            raise DomainError(f"{name} must lie in (0, 1), got {p}")
    if not (math.isfinite(snr) and snr > 0):
        raise DomainError(f"snr must be > 0, got {snr}")
    gap = gaussian_q_inv(target_pf) - gaussian_q_inv(target_pd) * (1.0 + snr)
    n = 2.0 * gap * gap / (snr * snr)
    # absorb float noise before taking the ceiling
    return max(1, math.ceil(round(n, 9)))


# ============================================================
# Exact chi-square laws of real Gaussian frames
# ============================================================

def pf_chi_square(config, noise_power):
    """Exact false-alarm rate: raw energy / sigma^2 ~ chi2(N)."""
    return reg_upper_gamma(config.n_samples / 2.0, config.threshold_raw / (2.0 * noise_power))


def pd_chi_square(config, noise_power, signal_power):
    """Exact detection rate with a Gaussian signal: raw energy / (P + sigma^2) ~ chi2(N)."""
    total = signal_power + noise_power
    return reg_upper_gamma(config.n_samples / 2.0, config.threshold_raw / (2.0 * total))


# ============================================================
# Marcum / incomplete gamma forms (noise-normalised energy)
# ============================================================

def pd_marcum(config, snr):
    """Q_N(sqrt(2 snr), sqrt(E_th)) for a 2N-degree-of-freedom energy."""
    if not (math.isfinite(snr) and snr >= 0):
        raise DomainError(f"snr must be >= 0, got {snr}")
    return marcum_q(config.n_samples, math.sqrt(2.0 * snr), math.sqrt(config.threshold_raw))


def pf_gamma(config, u):
    """Gamma(u, E_th/2) / Gamma(u), u being the time-bandwidth product."""
    if not (math.isfinite(u) and u > 0):
        raise DomainError(f"u must be > 0, got {u}")
    return reg_upper_gamma(u, config.threshold_raw / 2.0)


def pd_rayleigh(config, mean_snr):
    """
    Detection probability averaged over Rayleigh fading (exponential SNR with
    mean `mean_snr`), in closed form for an order-N Marcum detector:

        Q(N-1, E/2) + ((1+g)/g)^(N-1) e^(-E/(2(1+g))) P(N-1, E g/(2(1+g)))

    with Q/P the regularized upper/lower incomplete gamma ratios. The second
    term is assembled in log space; its factors overflow and underflow
    separately for large N and small g.
    """
    if not (math.isfinite(mean_snr) and mean_snr > 0):
        raise DomainError(f"mean_snr must be > 0, got {mean_snr}")
    n = config.n_samples
    half = config.threshold_raw / 2.0
    g = mean_snr
    if n == 1:
        return min(1.0, max(0.0, math.exp(-half / (1.0 + g))))

    head = reg_upper_gamma(n - 1, half)
    log_tail = ((n - 1) * math.log1p(1.0 / g) - half / (1.0 + g)
                + log_reg_lower_gamma(n - 1, half * g / (1.0 + g)))
    pd = head + math.exp(min(log_tail, 0.0))
    return min(1.0, max(0.0, pd))


def rayleigh_average(conditional_pd, mean_snr):
    """
    Average a conditional detection probability pd(snr) over the exponential
    SNR density with mean `mean_snr`.
    """
    if not (math.isfinite(mean_snr) and mean_snr > 0):
        raise DomainError(f"mean_snr must be > 0, got {mean_snr}")
    value, _ = integrate.quad(
        lambda g: conditional_pd(g) * math.exp(-g / mean_snr) / mean_snr,
        0.0, math.inf, epsabs=1e-10, epsrel=1e-10, limit=200,
    )
    return min(1.0, max(0.0, value))
