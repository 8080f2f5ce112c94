"""
Spectrum Sensing - Monte Carlo Experiments
Threshold sweeps for single users and for fused cooperative decisions, with
closed-form theory companions, plus SPRT sessions under SSDF attack.

Every trial draws from its own counter-based stream keyed by
(trial_index, channel_index), so results do not depend on execution order or
on the number of workers.
"""

import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from tqdm import tqdm

sys.path.insert(0, os.path.dirname(__file__))

from errors import ConfigError, DomainError, QuorumError
from signal_model import Fading, SeededRng, generate_noise, generate_signal_plus_noise
from energy_detector import (
    DetectorConfig, LocalReport, decide, energy_statistic,
    pd_chi_square, pd_gaussian, pf_chi_square, pf_gaussian, rayleigh_average,
)
from fusion import (
    HONEST, FusionRule, Reputation, SprtConfig, SprtDecision,
    apply_attacker, attack_reports, attacked_probability, clip_rule, fused_probability,
    simulate_reputation, sprt_expected_reports, sprt_run, trusted_users, votes_needed,
)

logger = logging.getLogger(__name__)

# Stream namespaces kept apart from the (trial, channel) frame streams.
ATTACK_STREAM = 1
SPRT_STREAM = 1 << 20
REPUTATION_STREAM = 1 << 21

CHUNK = 250


# ============================================================
# Types
# ============================================================

class Counting(str, Enum):
    STANDARD = "standard"
    CONDITIONAL = "conditional"


class TheoryModel(str, Enum):
    GAUSSIAN = "gaussian"
    CHI_SQUARE = "chi_square"


@dataclass(frozen=True)
class ThresholdSweep:
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError(f"threshold step must be > 0, got {self.step}")
        if not self.start < self.stop:
            raise DomainError(f"threshold start {self.start} must be below stop {self.stop}")
        if not self.start > 0:
            raise DomainError(f"threshold start must be > 0, got {self.start}")

    def values(self):
        """Grid start, start+step, ... up to and including stop."""
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return np.array([self.start + i * self.step for i in range(count)])


@dataclass(frozen=True)
class ExperimentSpec:
    channels: tuple
    sweeps: tuple
    n_samples: int = 100
    normalized: bool = False
    n_trials: int = 5000
    seed: int = 0
    rule: FusionRule = None
    counting: Counting = Counting.STANDARD
    profiles: tuple = ()
    theory: TheoryModel = TheoryModel.GAUSSIAN
    trust_floor: float = None
    workers: int = 1

    def __post_init__(self):
        channels = tuple(self.channels)
        sweeps = tuple(self.sweeps)
        profiles = tuple(self.profiles) or tuple(HONEST for _ in channels)
        if not channels:
            raise DomainError("an experiment needs at least one channel")
        if len(sweeps) == 1 and len(channels) > 1:
            sweeps = sweeps * len(channels)
        if len(sweeps) != len(channels):
            raise DomainError(f"{len(sweeps)} threshold sweeps for {len(channels)} channels")
        if len(profiles) != len(channels):
            raise DomainError(f"{len(profiles)} profiles for {len(channels)} channels")
        if isinstance(self.n_trials, bool) or int(self.n_trials) != self.n_trials \
                or self.n_trials < 1:
            raise DomainError(f"n_trials must be a positive integer, got {self.n_trials}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.trust_floor is not None and not (0.0 <= self.trust_floor <= 1.0):
            raise DomainError(f"trust_floor must lie in [0, 1], got {self.trust_floor}")
        if self.rule is not None:
            votes_needed(self.rule, len(channels))
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "sweeps", sweeps)
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "counting", Counting(self.counting))
        object.__setattr__(self, "theory", TheoryModel(self.theory))
        # validates n_samples
        self.detector(sweeps[0].start)

    def detector(self, threshold):
        return DetectorConfig(self.n_samples, threshold, self.normalized)


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    pf_sim: float
    pd_sim: float
    pf_theory: float
    pd_theory: float


@dataclass(frozen=True)
class TheoryPoint:
    threshold: float
    pf_theory: float
    pd_theory: float


@dataclass(frozen=True)
class TrialOutcome:
    noise_energy: float
    total_energy: float
    report: LocalReport


@dataclass(frozen=True)
class TrialEnergies:
    noise: np.ndarray  # (n_trials, n_channels)
    total: np.ndarray  # (n_trials, n_channels)
    lie_draws: np.ndarray  # (n_trials, n_channels, 2): H0 / H1 uploads


# ============================================================
# Trials
# ============================================================

def _channel_energies(spec, trial_index, channel_index, probe):
    ch = spec.channels[channel_index]
    rng = SeededRng(spec.seed, (trial_index, channel_index))
    power = ch.draw_signal_power(rng)
    noise = generate_noise(spec.n_samples, ch.noise_power, rng)
    both = generate_signal_plus_noise(spec.n_samples, power, ch.noise_power, rng, noise=noise)
    return energy_statistic(noise, probe), energy_statistic(both, probe)


def trial_energies(spec, trial_index):
    """(n_channels, 2) array of noise-only and signal-plus-noise energies."""
    probe = spec.detector(spec.sweeps[0].start)
    return np.array([
        _channel_energies(spec, trial_index, c, probe) for c in range(len(spec.channels))
    ])


def _lie_draws(spec, trial_index):
    draws = np.ones((len(spec.channels), 2))
    for c, profile in enumerate(spec.profiles):
        if profile.lie_probability > 0:
            draws[c] = SeededRng(spec.seed, (trial_index, c, ATTACK_STREAM)).random(2)
    return draws


def run_trial(spec, threshold_per_channel, trial_index):
    """
    One repetition: per channel, the noise-only energy, the signal-plus-noise
    energy of the same noise realization, and the local report under the
    spec's counting mode.
    """
    thresholds = list(threshold_per_channel)
    if len(thresholds) != len(spec.channels):
        raise DomainError(
            f"{len(thresholds)} thresholds for {len(spec.channels)} channels"
        )
    outcomes = []
    for (noise_e, total_e), th in zip(trial_energies(spec, trial_index), thresholds):
        report = decide(total_e, th)
        if spec.counting is Counting.CONDITIONAL and noise_e > th:
            report = LocalReport(0, report.energy)
        outcomes.append(TrialOutcome(float(noise_e), float(total_e), report))
    return outcomes


def _energy_chunk(spec, indices):
    energies = np.empty((len(indices), len(spec.channels), 2))
    lies = np.empty((len(indices), len(spec.channels), 2))
    for row, t in enumerate(indices):
        energies[row] = trial_energies(spec, t)
        lies[row] = _lie_draws(spec, t)
    return energies, lies


def simulate_energies(spec, progress=False):
    """Energies of every trial, computed once and shared by the whole sweep."""
    chunks = [range(s, min(s + CHUNK, spec.n_trials)) for s in range(0, spec.n_trials, CHUNK)]
    bar = tqdm(total=spec.n_trials, desc="trials", unit="trial",
               disable=not progress, file=sys.stderr, leave=False)
    results = []
    try:
        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                for part in pool.map(lambda idx: _energy_chunk(spec, idx), chunks):
                    results.append(part)
                    bar.update(part[0].shape[0])
        else:
            for idx in chunks:
                results.append(_energy_chunk(spec, idx))
                bar.update(len(idx))
    finally:
        bar.close()
    energies = np.concatenate([r[0] for r in results])
    lies = np.concatenate([r[1] for r in results])
    return TrialEnergies(energies[:, :, 0], energies[:, :, 1], lies)


# ============================================================
# Theory companions
# ============================================================

def channel_theory(spec, channel, threshold):
    """(pf, pd) of one channel at one threshold under the experiment's theory model."""
    cfg = spec.detector(threshold)
    sigma2 = channel.noise_power
    if spec.theory is TheoryModel.CHI_SQUARE:
        pf = pf_chi_square(cfg, sigma2)
        pd_at = lambda power: pd_chi_square(cfg, sigma2, power)
    else:
        pf = pf_gaussian(cfg, sigma2)
        pd_at = lambda power: pd_gaussian(cfg, sigma2, power)
    if channel.fading is Fading.RAYLEIGH:
        pd = rayleigh_average(lambda g: pd_at(g * sigma2), channel.mean_snr)
    else:
        pd = pd_at(channel.signal_power)
    return pf, pd


def theory_curves(spec):
    """Closed-form (pf, pd) along each channel's own sweep."""
    return [
        [TheoryPoint(float(th), *channel_theory(spec, ch, th)) for th in sweep.values()]
        for ch, sweep in zip(spec.channels, spec.sweeps)
    ]


def _active_users(spec, reputations):
    if spec.trust_floor is None:
        return list(range(len(spec.channels)))
    if reputations is None:
        reputations = [Reputation() for _ in spec.channels]
    keep = trusted_users(reputations, spec.trust_floor)
    if not keep:
        raise QuorumError(f"every user is below trust floor {spec.trust_floor}")
    return keep


def fused_theory(spec, threshold, users, rule):
    pf_users, pd_users = [], []
    for i in users:
        pf, pd = channel_theory(spec, spec.channels[i], threshold)
        pf_users.append(attacked_probability(pf, spec.profiles[i]))
        pd_users.append(attacked_probability(pd, spec.profiles[i]))
    return fused_probability(pf_users, rule), fused_probability(pd_users, rule)


def fused_theory_curve(spec, reputations=None):
    if spec.rule is None:
        raise ConfigError("a fused curve needs a fusion rule")
    users = _active_users(spec, reputations)
    rule = clip_rule(spec.rule, len(users))
    return [
        TheoryPoint(float(th), *fused_theory(spec, th, users, rule))
        for th in spec.sweeps[0].values()
    ]


# ============================================================
# Sweeps
# ============================================================

def _rates(h0_hits, h1_hits, counting, n_trials):
    """Count false alarms and detections over trials (axis 0)."""
    false_alarms = h0_hits.sum(axis=0)
    if counting is Counting.CONDITIONAL:
        detections = (~h0_hits & h1_hits).sum(axis=0)
    else:
        detections = h1_hits.sum(axis=0)
    return false_alarms / n_trials, detections / n_trials


def run_single_user(spec, energies=None, progress=False):
    """Per-channel curves over each channel's sweep."""
    if spec.rule is not None:
        raise ConfigError("single-user runs take no fusion rule")
    logger.info("single-user sweep: %d channels, %d trials, seed %d",
                len(spec.channels), spec.n_trials, spec.seed)
    energies = energies or simulate_energies(spec, progress)
    curves = []
    for c, (ch, sweep) in enumerate(zip(spec.channels, spec.sweeps)):
        grid = sweep.values()
        h0 = energies.noise[:, c, None] > grid[None, :]
        h1 = energies.total[:, c, None] > grid[None, :]
        pf_sim, pd_sim = _rates(h0, h1, spec.counting, spec.n_trials)
        points = []
        for i, th in enumerate(grid):
            pf_th, pd_th = channel_theory(spec, ch, th)
            points.append(CurvePoint(float(th), float(pf_sim[i]), float(pd_sim[i]), pf_th, pd_th))
        logger.debug("channel %d (%.1f dB): %d points", c + 1, ch.snr_db, len(points))
        curves.append(points)
    return curves


def run_cooperative(spec, reputations=None, energies=None, progress=False):
    """
    Fused curve on the first channel's sweep, shared by all users.

    Uploads pass through each user's attacker profile. With a trust floor set,
    users whose reputation falls below it are left out and a K-rank k is
    clipped to the survivors.
    """
    if spec.rule is None:
        raise ConfigError("cooperative runs need a fusion rule")
    users = _active_users(spec, reputations)
    rule = clip_rule(spec.rule, len(users))
    needed = votes_needed(rule, len(users))
    logger.info("cooperative sweep: rule %s over %d of %d users, %d trials, seed %d",
                rule, len(users), len(spec.channels), spec.n_trials, spec.seed)

    energies = energies or simulate_energies(spec, progress)
    grid = spec.sweeps[0].values()
    votes0 = np.zeros((spec.n_trials, len(grid)), dtype=int)
    votes1 = np.zeros((spec.n_trials, len(grid)), dtype=int)
    for c in users:
        profile = spec.profiles[c]
        h0 = energies.noise[:, c, None] > grid[None, :]
        h1 = energies.total[:, c, None] > grid[None, :]
        votes0 += attack_reports(h0, profile, energies.lie_draws[:, c, 0, None])
        votes1 += attack_reports(h1, profile, energies.lie_draws[:, c, 1, None])
    pf_sim, pd_sim = _rates(votes0 >= needed, votes1 >= needed, spec.counting, spec.n_trials)

    return [
        CurvePoint(float(th), float(pf_sim[i]), float(pd_sim[i]),
                   *fused_theory(spec, th, users, rule))
        for i, th in enumerate(grid)
    ]


# ============================================================
# Theory comparison
# ============================================================

@dataclass(frozen=True)
class PointDeviation:
    threshold: float
    pf_gap: float
    pf_se: float
    pd_gap: float
    pd_se: float
    pf_flagged: bool
    pd_flagged: bool

    @property
    def flagged(self):
        return self.pf_flagged or self.pd_flagged


@dataclass(frozen=True)
class TheoryComparison:
    deviations: tuple
    n_trials: int
    sigmas: float = 3.0

    @property
    def flagged_points(self):
        return [d.threshold for d in self.deviations if d.flagged]

    @property
    def within_fraction(self):
        """Share of pf/pd values within `sigmas` standard errors of theory."""
        if not self.deviations:
            return 1.0
        flags = [f for d in self.deviations for f in (d.pf_flagged, d.pd_flagged)]
        return 1.0 - sum(flags) / len(flags)


def binomial_se(p, n_trials):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n_trials)


def compare_theory(points, n_trials, sigmas=3.0):
    """Simulation-vs-theory gaps with binomial standard errors at the theory value."""
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials}")
    deviations = []
    for pt in points:
        pf_gap = abs(pt.pf_sim - pt.pf_theory)
        pd_gap = abs(pt.pd_sim - pt.pd_theory)
        pf_se = binomial_se(pt.pf_theory, n_trials)
        pd_se = binomial_se(pt.pd_theory, n_trials)
        deviations.append(PointDeviation(
            pt.threshold, pf_gap, pf_se, pd_gap, pd_se,
            pf_gap > sigmas * pf_se, pd_gap > sigmas * pd_se,
        ))
    return TheoryComparison(tuple(deviations), n_trials, sigmas)


# ============================================================
# SPRT under attack
# ============================================================

@dataclass(frozen=True)
class SprtExperiment:
    config: SprtConfig
    reputation_rounds: int = 50
    busy_probability: float = 0.5
    trust_floor: float = 0.6

    def __post_init__(self):
        if self.reputation_rounds < 0:
            raise DomainError(f"reputation_rounds must be >= 0, got {self.reputation_rounds}")
        if not (0.0 <= self.busy_probability <= 1.0):
            raise DomainError(f"busy_probability must lie in [0, 1], got {self.busy_probability}")
        if not (0.0 <= self.trust_floor <= 1.0):
            raise DomainError(f"trust_floor must lie in [0, 1], got {self.trust_floor}")


@dataclass(frozen=True)
class SprtScenarioResult:
    scenario: str
    false_alarm_rate: float
    miss_rate: float
    mean_reports: float
    undecided_rate: float
    expected_reports: float


def _session_reports(profiles, p_one, rng):
    """Endless round-robin uploads from the given users."""
    while True:
        for profile in profiles:
            raw = 1 if rng.random() < p_one else 0
            yield apply_attacker(raw, profile, rng)


def _run_sessions(name, profiles, cfg, n_trials, seed):
    accept_h1 = {0: 0, 1: 0}
    accept_h0 = {0: 0, 1: 0}
    undecided = 0
    consumed = 0
    for busy in (0, 1):
        p_one = cfg.p_h1 if busy else cfg.p_h0
        for t in range(n_trials):
            rng = SeededRng(seed, (SPRT_STREAM, t, busy))
            outcome = sprt_run(_session_reports(profiles, p_one, rng), cfg)
            consumed += outcome.at
            if outcome.decision is SprtDecision.ACCEPT_H1:
                accept_h1[busy] += 1
            elif outcome.decision is SprtDecision.ACCEPT_H0:
                accept_h0[busy] += 1
            else:
                undecided += 1

    expected = []
    for p_one in (cfg.p_h0, cfg.p_h1):
        uploads = [attacked_probability(p_one, profile) for profile in profiles]
        expected.append(sprt_expected_reports(cfg, sum(uploads) / len(uploads)))
    result = SprtScenarioResult(
        name,
        accept_h1[0] / n_trials,
        accept_h0[1] / n_trials,
        consumed / (2 * n_trials),
        undecided / (2 * n_trials),
        sum(expected) / 2.0,
    )
    logger.info("sprt %s: false alarm %.4f, miss %.4f, mean reports %.2f",
                name, result.false_alarm_rate, result.miss_rate, result.mean_reports)
    return result


def train_reputations(spec, sprt):
    """Reputations of the experiment's users after majority-vote training rounds."""
    profiles = list(spec.profiles)
    majority = FusionRule.k_rank(len(profiles) // 2 + 1)
    return simulate_reputation(
        profiles, sprt.reputation_rounds, sprt.config.p_h1, sprt.config.p_h0,
        sprt.busy_probability, majority, SeededRng(spec.seed, (REPUTATION_STREAM,)),
    )


def run_sprt_attack(spec, sprt):
    """
    Sequential sessions in three scenarios: all users honest, the experiment's
    attacker profiles, and the attacker profiles after reputation training
    with untrusted users skipped.
    """
    cfg = sprt.config
    profiles = list(spec.profiles)
    results = [
        _run_sessions("honest", [HONEST] * len(profiles), cfg, spec.n_trials, spec.seed),
        _run_sessions("attacked", profiles, cfg, spec.n_trials, spec.seed),
    ]

    reputations = train_reputations(spec, sprt)
    keep = trusted_users(reputations, sprt.trust_floor)
    if not keep:
        raise QuorumError(f"every user is below trust floor {sprt.trust_floor}")
    logger.info("trust filter keeps users %s", [i + 1 for i in keep])
    results.append(_run_sessions(
        "attacked_trust", [profiles[i] for i in keep], cfg, spec.n_trials, spec.seed,
    ))
    return results
