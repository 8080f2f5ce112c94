"""
Spectrum Sensing - Decision Fusion
Hard-decision fusion (AND / OR / K-rank) and its closed-form fused
probabilities, SPRT soft fusion over 1-bit reports, SSDF attacker behaviour
and feedback-reputation accounting.
"""

import itertools
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import stats
from scipy.optimize import brentq

sys.path.insert(0, os.path.dirname(__file__))

from errors import CapacityError, DomainError, QuorumError

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 20


# ============================================================
# Types
# ============================================================

class RuleKind(str, Enum):
    AND = "and"
    OR = "or"
    K_RANK = "k_rank"


@dataclass(frozen=True)
class FusionRule:
    kind: RuleKind
    k: int = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if self.kind is RuleKind.K_RANK:
            if self.k is None or isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
                raise DomainError(f"k_rank needs a positive integer k, got {self.k}")
            object.__setattr__(self, "k", int(self.k))
        elif self.k is not None:
            raise DomainError(f"k is only meaningful for k_rank, got k={self.k} with {self.kind.value}")

    @classmethod
    def and_(cls):
        return cls(RuleKind.AND)

    @classmethod
    def or_(cls):
        return cls(RuleKind.OR)

    @classmethod
    def k_rank(cls, k):
        return cls(RuleKind.K_RANK, k)

    def __str__(self):
        if self.kind is RuleKind.K_RANK:
            return f"k_rank({self.k})"
        return self.kind.value


class Behavior(str, Enum):
    HONEST = "honest"
    ALWAYS_BUSY = "always_busy"
    ALWAYS_FREE = "always_free"
    INTERMITTENT = "intermittent"


@dataclass(frozen=True)
class UserProfile:
    behavior: Behavior = Behavior.HONEST
    lie_probability: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "behavior", Behavior(self.behavior))
        if not (0.0 <= self.lie_probability <= 1.0):
            raise DomainError(f"lie_probability must lie in [0, 1], got {self.lie_probability}")

    @property
    def is_honest(self):
        return self.behavior is Behavior.HONEST or (
            self.behavior is Behavior.INTERMITTENT and self.lie_probability == 0.0
        )


HONEST = UserProfile()


@dataclass(frozen=True)
class SprtConfig:
    alpha: float
    beta: float
    p_h1: float
    p_h0: float
    max_reports: int = 1000

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5 and 0.0 < self.beta < 0.5):
            raise DomainError(f"alpha and beta must lie in (0, 0.5), got {self.alpha}, {self.beta}")
        if not (0.0 < self.p_h0 < self.p_h1 < 1.0):
            raise DomainError(f"need 0 < p_h0 < p_h1 < 1, got p_h0={self.p_h0}, p_h1={self.p_h1}")
        if isinstance(self.max_reports, bool) or int(self.max_reports) != self.max_reports \
                or self.max_reports < 1:
            raise DomainError(f"max_reports must be a positive integer, got {self.max_reports}")

    @property
    def upper(self):
        """Wald acceptance boundary for H1."""
        return (1.0 - self.beta) / self.alpha

    @property
    def lower(self):
        """Wald acceptance boundary for H0."""
        return self.beta / (1.0 - self.alpha)


class SprtDecision(str, Enum):
    ACCEPT_H1 = "accept_h1"
    ACCEPT_H0 = "accept_h0"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class SprtOutcome:
    decision: SprtDecision
    at: int  # reports consumed
    statistic: float


@dataclass(frozen=True)
class Reputation:
    affirmations: int = 0
    complaints: int = 0

    @property
    def trust(self):
        # Laplace-smoothed: fresh users sit at 0.5
        return (self.affirmations + 1) / (self.affirmations + self.complaints + 2)


# ============================================================
# Hard fusion
# ============================================================

def _bits(reports):
    return [int(getattr(r, "decision", r)) for r in reports]


def votes_needed(rule, n):
    """Number of 1-reports out of n that make the fused decision 1."""
    if n < 1:
        raise DomainError("fusion needs at least one report")
    if rule.kind is RuleKind.AND:
        return n
    if rule.kind is RuleKind.OR:
        return 1
    if rule.k > n:
        raise DomainError(f"k_rank k={rule.k} exceeds the {n} reporting users")
    return rule.k


def fuse_reports(reports, rule):
    """Fused 1-bit decision from LocalReports (or bare 0/1 values)."""
    bits = _bits(reports)
    return 1 if sum(bits) >= votes_needed(rule, len(bits)) else 0


def _check_probs(probs):
    probs = [float(p) for p in probs]
    if not probs:
        raise DomainError("fusion needs at least one probability")
    for p in probs:
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"probabilities must lie in [0, 1], got {p}")
    return probs


def fused_probability(per_user_probs, rule):
    """
    Probability that the fused decision is 1 when user i reports 1 with
    probability p_i, independently. Applied to detection probabilities this is
    Q_d, to false-alarm probabilities Q_f.
    """
    probs = _check_probs(per_user_probs)
    needed = votes_needed(rule, len(probs))
    if rule.kind is RuleKind.AND:
        return math.prod(probs)
    if rule.kind is RuleKind.OR:
        return 1.0 - math.prod(1.0 - p for p in probs)

    # Distribution of the number of 1-reports (Poisson-binomial), built user by user.
    dist = [1.0]
    for p in probs:
        nxt = [0.0] * (len(dist) + 1)
        for count, mass in enumerate(dist):
            nxt[count] += mass * (1.0 - p)
            nxt[count + 1] += mass * p
        dist = nxt
    return min(1.0, max(0.0, math.fsum(dist[needed:])))


def brute_force_fused_probability(per_user_probs, rule):
    """Exact fused probability by enumerating all 2^N report vectors."""
    probs = _check_probs(per_user_probs)
    if len(probs) > BRUTE_FORCE_LIMIT:
        raise CapacityError(
            f"brute force supports at most {BRUTE_FORCE_LIMIT} users, got {len(probs)}"
        )
    votes_needed(rule, len(probs))
    total = []
    for bits in itertools.product((0, 1), repeat=len(probs)):
        if fuse_reports(bits, rule):
            total.append(math.prod(p if b else 1.0 - p for p, b in zip(probs, bits)))
    return math.fsum(total)


# ============================================================
# SPRT soft fusion
# ============================================================

def sprt_run(reports, config):
    """
    Sequential probability ratio test over a stream of 1-bit reports.

    S_n is the running product of per-report likelihood ratios; the test stops
    at the first n with S_n >= (1-beta)/alpha (accept H1) or
    S_n <= beta/(1-alpha) (accept H0). At most max_reports are consumed.
    """
    if not isinstance(config, SprtConfig):
        raise DomainError(f"expected SprtConfig, got {type(config).__name__}")
    ratio_one = config.p_h1 / config.p_h0
    ratio_zero = (1.0 - config.p_h1) / (1.0 - config.p_h0)
    upper, lower = config.upper, config.lower

    s = 1.0
    n = 0
    for report in reports:
        if n >= config.max_reports:
            break
        n += 1
        s *= ratio_one if int(getattr(report, "decision", report)) else ratio_zero
        if s >= upper:
            return SprtOutcome(SprtDecision.ACCEPT_H1, n, s)
        if s <= lower:
            return SprtOutcome(SprtDecision.ACCEPT_H0, n, s)
    return SprtOutcome(SprtDecision.UNDECIDED, n, s)


def sprt_expected_reports(config, p_one):
    """
    Wald's approximation of the mean number of reports consumed when each
    report is 1 with probability p_one (ignores boundary overshoot).
    """
    if not (0.0 <= p_one <= 1.0):
        raise DomainError(f"p_one must lie in [0, 1], got {p_one}")
    l1 = math.log(config.p_h1 / config.p_h0)
    l0 = math.log((1.0 - config.p_h1) / (1.0 - config.p_h0))
    log_a, log_b = math.log(config.upper), math.log(config.lower)
    drift = p_one * l1 + (1.0 - p_one) * l0
    if p_one in (0.0, 1.0):
        # deterministic walk: every report moves the statistic by the same step
        step = l1 if p_one == 1.0 else l0
        target = log_a if step > 0 else log_b
        return float(math.ceil(target / step - 1e-12))
    if abs(drift) < 1e-12:
        second = p_one * l1 * l1 + (1.0 - p_one) * l0 * l0
        return -log_a * log_b / second

    # Probability of hitting the upper boundary: root h != 0 of E[exp(h * step)] = 1
    def mgf(h):
        return p_one * math.exp(h * l1) + (1.0 - p_one) * math.exp(h * l0) - 1.0

    direction = -1.0 if drift > 0 else 1.0
    lo, hi = direction * 1e-9, direction * 1.0
    while mgf(hi) < 0:
        hi *= 2.0
    h = brentq(mgf, min(lo, hi), max(lo, hi))
    ea, eb = math.exp(h * log_a), math.exp(h * log_b)
    p_upper = (1.0 - eb) / (ea - eb)
    return (p_upper * log_a + (1.0 - p_upper) * log_b) / drift


def majority_vote_sample_count(p_correct, target_error, limit=10001):
    """
    Smallest odd report count n whose majority vote errs with probability
    <= target_error, each report being correct with probability p_correct.
    """
    if not (0.5 < p_correct < 1.0):
        raise DomainError(f"p_correct must lie in (0.5, 1), got {p_correct}")
    if not (0.0 < target_error < 0.5):
        raise DomainError(f"target_error must lie in (0, 0.5), got {target_error}")
    for n in range(1, limit + 1, 2):
        if stats.binom.cdf((n - 1) // 2, n, p_correct) <= target_error:
            return n
    raise CapacityError(f"no odd report count up to {limit} reaches error {target_error}")


# ============================================================
# SSDF attackers
# ============================================================

def apply_attacker(true_report, profile, rng):
    """The report a user actually uploads given its behaviour."""
    bit = int(getattr(true_report, "decision", true_report))
    behavior = profile.behavior
    if behavior is Behavior.ALWAYS_BUSY:
        return 1
    if behavior is Behavior.ALWAYS_FREE:
        return 0
    if behavior is Behavior.INTERMITTENT and profile.lie_probability > 0:
        if rng.random() < profile.lie_probability:
            return 1 - bit
    return bit


def attack_reports(bits, profile, lie_draws):
    """
    Vectorised apply_attacker over an array of true reports; lie_draws holds
    the uniform draws deciding intermittent lies and broadcasts against bits.
    """
    bits = np.asarray(bits, dtype=bool)
    behavior = profile.behavior
    if behavior is Behavior.ALWAYS_BUSY:
        return np.ones_like(bits)
    if behavior is Behavior.ALWAYS_FREE:
        return np.zeros_like(bits)
    if behavior is Behavior.INTERMITTENT and profile.lie_probability > 0:
        return bits ^ (np.asarray(lie_draws) < profile.lie_probability)
    return bits


def attacked_probability(p, profile):
    """Probability an uploaded report is 1 when the true report is 1 w.p. p."""
    behavior = profile.behavior
    if behavior is Behavior.ALWAYS_BUSY:
        return 1.0
    if behavior is Behavior.ALWAYS_FREE:
        return 0.0
    if behavior is Behavior.INTERMITTENT:
        q = profile.lie_probability
        return p * (1.0 - q) + (1.0 - p) * q
    return p


# ============================================================
# Feedback reputation
# ============================================================

def update_reputation(rep, report, fused_decision):
    """Affirm a user whose report matched the fused decision, complain otherwise."""
    if int(getattr(report, "decision", report)) == int(fused_decision):
        return replace(rep, affirmations=rep.affirmations + 1)
    return replace(rep, complaints=rep.complaints + 1)


def trusted_users(reputations, trust_floor):
    """Indices of users whose trust is at or above the floor."""
    return [i for i, rep in enumerate(reputations) if rep.trust >= trust_floor]


def clip_rule(rule, n):
    """Rule for n surviving users; K-rank k is clipped to n."""
    if rule.kind is RuleKind.K_RANK and rule.k > n:
        return FusionRule.k_rank(n)
    return rule


def fuse_with_trust(reports, reputations, rule, trust_floor):
    """fuse_reports over the users whose trust reaches trust_floor."""
    reports = list(reports)
    reputations = list(reputations)
    if len(reports) != len(reputations):
        raise DomainError(
            f"{len(reports)} reports but {len(reputations)} reputations"
        )
    keep = trusted_users(reputations, trust_floor)
    if not keep:
        raise QuorumError(f"every user is below trust floor {trust_floor}")
    survivors = [reports[i] for i in keep]
    return fuse_reports(survivors, clip_rule(rule, len(survivors)))


def simulate_reputation(profiles, n_rounds, p_h1, p_h0, busy_probability, rule, rng):
    """
    Train reputations over n_rounds of hard fusion.

    Each round draws the primary user's state (busy with busy_probability),
    draws every user's true report as Bernoulli(p_h1) or Bernoulli(p_h0),
    passes it through the user's attacker profile, fuses the uploads under
    `rule` and scores each upload against the fused decision.
    """
    reputations = [Reputation() for _ in profiles]
    for _ in range(n_rounds):
        busy = rng.random() < busy_probability
        p_one = p_h1 if busy else p_h0
        uploads = [
            apply_attacker(1 if rng.random() < p_one else 0, profile, rng)
            for profile in profiles
        ]
        fused = fuse_reports(uploads, rule)
        reputations = [
            update_reputation(rep, bit, fused) for rep, bit in zip(reputations, uploads)
        ]
    logger.debug("reputation after %d rounds: %s", n_rounds,
                 [round(r.trust, 3) for r in reputations])
    return reputations
