"""
Spectrum Sensing — Python Package Exports

Usage:
    from scripts import ChannelSpec, ExperimentSpec, ThresholdSweep, run_single_user
    from scripts import FusionRule, fused_probability, sprt_run

The modules import each other by bare name, so the exports below come from
those same module objects rather than from `scripts.<module>` copies.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# Special functions
from special_functions import (
    gaussian_q, gaussian_q_inv, log_reg_lower_gamma, marcum_q, reg_upper_gamma,
)

# Signal model
from signal_model import (
    ChannelSpec,
    Fading,
    Hypothesis,
    SampleFrame,
    SeededRng,
    generate_noise,
    generate_signal_plus_noise,
    sample_rayleigh_snr,
)

# Energy detector
from energy_detector import (
    DetectorConfig,
    LocalReport,
    decide,
    energy_statistic,
    pd_chi_square,
    pd_gaussian,
    pd_marcum,
    pd_rayleigh,
    pf_chi_square,
    pf_gamma,
    pf_gaussian,
    rayleigh_average,
    required_samples,
    threshold_for_pf,
)

# Fusion
from fusion import (
    Behavior,
    FusionRule,
    Reputation,
    SprtConfig,
    SprtDecision,
    UserProfile,
    apply_attacker,
    attacked_probability,
    brute_force_fused_probability,
    fuse_reports,
    fuse_with_trust,
    fused_probability,
    majority_vote_sample_count,
    simulate_reputation,
    sprt_expected_reports,
    sprt_run,
    update_reputation,
)

# Monte Carlo
from montecarlo import (
    Counting,
    CurvePoint,
    ExperimentSpec,
    SprtExperiment,
    TheoryModel,
    ThresholdSweep,
    compare_theory,
    run_cooperative,
    run_single_user,
    run_sprt_attack,
    run_trial,
    theory_curves,
)

# Config and reports
from config import RunConfig, load_config, parse_config, serialize_config
from reports import emit_csv, emit_sprt_csv, emit_theory_csv

__all__ = [
    # Special functions
    "gaussian_q", "gaussian_q_inv", "log_reg_lower_gamma", "marcum_q", "reg_upper_gamma",
    # Signal model
    "ChannelSpec", "Fading", "Hypothesis", "SampleFrame", "SeededRng",
    "generate_noise", "generate_signal_plus_noise", "sample_rayleigh_snr",
    # Energy detector
    "DetectorConfig", "LocalReport", "decide", "energy_statistic",
    "pd_chi_square", "pd_gaussian", "pd_marcum", "pd_rayleigh",
    "pf_chi_square", "pf_gamma", "pf_gaussian", "rayleigh_average",
    "required_samples", "threshold_for_pf",
    # Fusion
    "Behavior", "FusionRule", "Reputation", "SprtConfig", "SprtDecision", "UserProfile",
    "apply_attacker", "attacked_probability", "brute_force_fused_probability",
    "fuse_reports", "fuse_with_trust", "fused_probability", "majority_vote_sample_count",
    "simulate_reputation", "sprt_expected_reports", "sprt_run", "update_reputation",
    # Monte Carlo
    "Counting", "CurvePoint", "ExperimentSpec", "SprtExperiment", "TheoryModel",
    "ThresholdSweep", "compare_theory", "run_cooperative", "run_single_user",
    "run_sprt_attack", "run_trial", "theory_curves",
    # Config and reports
    "RunConfig", "load_config", "parse_config", "serialize_config",
    "emit_csv", "emit_sprt_csv", "emit_theory_csv",
]
