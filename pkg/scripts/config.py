"""
Spectrum Sensing - Configuration and Constants
Default experiment parameters, environment settings and the run-config
document parser.

Environment variables (an optional .env at the repository root is loaded first):
- SENSING_SEED — overrides the RNG seed of every loaded run config
- SENSING_OUTPUT_DIR — base directory for relative output paths (default: <repo>/results/)
- SENSING_WORKERS — default worker count for trial generation (default: 1)
- SENSING_LOG_LEVEL — logging level name (default: INFO)
- SENSING_PROGRESS — set to 0 to hide the trial progress bar
"""

import os
import re
import sys
from dataclasses import dataclass
from enum import Enum

import yaml

sys.path.insert(0, os.path.dirname(__file__))

from errors import ConfigError, ConfigParseError, ConfigValidationError, DomainError
from signal_model import ChannelSpec, Fading
from fusion import Behavior, FusionRule, RuleKind, SprtConfig, UserProfile
from montecarlo import Counting, ExperimentSpec, SprtExperiment, TheoryModel, ThresholdSweep

REPO_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _load_dotenv():
    """Load .env file from the repository root if it exists. No dependencies required."""
    env_path = os.path.join(REPO_DIR, ".env")
    if not os.path.isfile(env_path):
        return
    with open(env_path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            # Don't override existing env vars
            if key and key not in os.environ:
                os.environ[key] = value


_load_dotenv()

# ============================================================
# Defaults
# ============================================================

DEFAULT_N_TRIALS = 5000
DEFAULT_N_SAMPLES = 100  # F * T = 1e5 Hz * 1 ms
DEFAULT_NOISE_POWER = 4.0  # puts the H0 mean energy N * sigma^2 = 400 inside the first sweep
DEFAULT_SWEEP = (200.0, 600.0, 20.0)

DEFAULT_SPRT = {"max_reports": 1000, "reputation_rounds": 50,
                "busy_probability": 0.5, "trust_floor": 0.6}

# The three reference channels with their threshold sweeps (raw energy units).
REFERENCE_CHANNELS = {
    1: {"snr_db": 5.0, "sweep": (200.0, 600.0, 20.0)},
    2: {"snr_db": -8.0, "sweep": (500.0, 900.0, 20.0)},
    3: {"snr_db": -10.0, "sweep": (700.0, 1300.0, 20.0)},
}

# ============================================================
# Environment
# ============================================================

OUTPUT_DIR = os.environ.get("SENSING_OUTPUT_DIR", os.path.join(REPO_DIR, "results"))
LOG_LEVEL = os.environ.get("SENSING_LOG_LEVEL", "INFO").upper()
SHOW_PROGRESS = os.environ.get("SENSING_PROGRESS", "1") != "0"


def _env_integer(name, minimum):
    raw = os.environ.get(name, "").strip()
    if not raw:
        return None
    try:
        value = int(raw, 0)
    except ValueError:
        raise ConfigValidationError(name, f"not an integer: {raw!r}")
    if value < minimum:
        raise ConfigValidationError(name, f"must be >= {minimum}, got {value}")
    return value


def default_workers():
    """SENSING_WORKERS, read when a config is parsed; 1 when unset."""
    workers = _env_integer("SENSING_WORKERS", 1)
    return 1 if workers is None else workers


def seed_override():
    """SENSING_SEED as a non-negative integer, or None when unset."""
    return _env_integer("SENSING_SEED", 0)


def resolve_output(path):
    """Relative output paths live under OUTPUT_DIR."""
    path = os.path.expanduser(path)
    return path if os.path.isabs(path) else os.path.join(OUTPUT_DIR, path)


def default_experiment(n_trials=DEFAULT_N_TRIALS, seed=0):
    """The three reference channels, each with its own sweep."""
    return ExperimentSpec(
        channels=tuple(ChannelSpec(c["snr_db"], DEFAULT_NOISE_POWER) for c in REFERENCE_CHANNELS.values()),
        sweeps=tuple(ThresholdSweep(*c["sweep"]) for c in REFERENCE_CHANNELS.values()),
        n_samples=DEFAULT_N_SAMPLES,
        n_trials=n_trials,
        seed=seed,
    )


# ============================================================
# Run config
# ============================================================

class Mode(str, Enum):
    SINGLE_USER = "single_user"
    COOPERATIVE = "cooperative"
    SPRT_ATTACK = "sprt_attack"
    THEORY_ONLY = "theory_only"


@dataclass(frozen=True)
class RunConfig:
    mode: Mode
    experiment: ExperimentSpec
    output_path: str
    sprt: SprtExperiment = None
    channel_ids: tuple = ()


EXPERIMENT_KEYS = {
    "mode", "output", "n_trials", "n_samples", "normalized", "seed", "counting",
    "theory", "rule", "k", "noise_power", "threshold_start", "threshold_stop",
    "threshold_step", "trust_floor", "workers",
}
CHANNEL_KEYS = {
    "snr_db", "noise_power", "fading", "mean_snr", "threshold_start", "threshold_stop",
    "threshold_step", "profile", "lie_probability",
}
SPRT_KEYS = {"alpha", "beta", "p_h1", "p_h0", "max_reports", "reputation_rounds",
             "busy_probability", "trust_floor"}

_CHANNEL_SECTION = re.compile(r"^channel\.(\d+)$")


def _real(field, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(field, f"expected a number, got {value!r}")
    return float(value)


def _integer(field, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(field, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigValidationError(field, f"must be >= {minimum}, got {value}")
    return value


def _flag(field, value):
    if not isinstance(value, bool):
        raise ConfigValidationError(field, f"expected true or false, got {value!r}")
    return value


def _choice(field, value, enum):
    try:
        return enum(value)
    except ValueError:
        options = ", ".join(e.value for e in enum)
        raise ConfigValidationError(field, f"expected one of {options}, got {value!r}")


def _check_keys(section, body, allowed):
    if body is None:
        return {}
    if not isinstance(body, dict):
        raise ConfigValidationError(section, "expected a mapping of keys")
    for key in body:
        if key not in allowed:
            raise ConfigValidationError(f"{section}.{key}", "unknown key")
    return body


def _sweep(section, body, fallback):
    values = []
    for name, default in zip(("threshold_start", "threshold_stop", "threshold_step"), fallback):
        values.append(_real(f"{section}.{name}", body[name]) if name in body else default)
    start, stop, step = values
    prefix = section if any(k in body for k in ("threshold_start", "threshold_stop",
                                                  "threshold_step")) else "experiment"
    if not step > 0:
        raise ConfigValidationError(f"{prefix}.threshold_step", f"must be > 0, got {step}")
    if not start < stop:
        raise ConfigValidationError(f"{prefix}.threshold_stop",
                                    f"must exceed threshold_start {start}, got {stop}")
    if not start > 0:
        raise ConfigValidationError(f"{prefix}.threshold_start", f"must be > 0, got {start}")
    return ThresholdSweep(start, stop, step)


def _channel(section, body, noise_default):
    body = _check_keys(section, body, CHANNEL_KEYS)
    if "snr_db" not in body:
        raise ConfigValidationError(f"{section}.snr_db", "required")
    snr_db = _real(f"{section}.snr_db", body["snr_db"])
    noise = _real(f"{section}.noise_power", body.get("noise_power", noise_default))
    if not noise > 0:
        raise ConfigValidationError(f"{section}.noise_power", f"must be > 0, got {noise}")
    fading = _choice(f"{section}.fading", body.get("fading", "constant"), Fading)
    mean_snr = None
    if "mean_snr" in body:
        if fading is not Fading.RAYLEIGH:
            raise ConfigValidationError(f"{section}.mean_snr", "only valid with fading: rayleigh")
        mean_snr = _real(f"{section}.mean_snr", body["mean_snr"])
        if not mean_snr > 0:
            raise ConfigValidationError(f"{section}.mean_snr", f"must be > 0, got {mean_snr}")

    behavior = _choice(f"{section}.profile", body.get("profile", "honest"), Behavior)
    lie = 0.0
    if "lie_probability" in body:
        if behavior is not Behavior.INTERMITTENT:
            raise ConfigValidationError(f"{section}.lie_probability",
                                        "only valid with profile: intermittent")
        lie = _real(f"{section}.lie_probability", body["lie_probability"])
        if not 0.0 <= lie <= 1.0:
            raise ConfigValidationError(f"{section}.lie_probability", f"must lie in [0, 1], got {lie}")
    return ChannelSpec(snr_db, noise, fading, mean_snr), UserProfile(behavior, lie), body


def _rule(body):
    if "rule" not in body:
        if "k" in body:
            raise ConfigValidationError("experiment.k", "only valid with rule: k_rank")
        return None
    kind = _choice("experiment.rule", body["rule"], RuleKind)
    if kind is RuleKind.K_RANK:
        if "k" not in body:
            raise ConfigValidationError("experiment.k", "required for rule: k_rank")
        return FusionRule(kind, _integer("experiment.k", body["k"], minimum=1))
    if "k" in body:
        raise ConfigValidationError("experiment.k", "only valid with rule: k_rank")
    return FusionRule(kind)


def _sprt(body):
    body = _check_keys("sprt", body, SPRT_KEYS)
    merged = dict(DEFAULT_SPRT, **body)
    for key in ("alpha", "beta", "p_h1", "p_h0"):
        if key not in merged:
            raise ConfigValidationError(f"sprt.{key}", "required")
    try:
        cfg = SprtConfig(
            _real("sprt.alpha", merged["alpha"]),
            _real("sprt.beta", merged["beta"]),
            _real("sprt.p_h1", merged["p_h1"]),
            _real("sprt.p_h0", merged["p_h0"]),
            _integer("sprt.max_reports", merged["max_reports"], minimum=1),
        )
        return SprtExperiment(
            cfg,
            _integer("sprt.reputation_rounds", merged["reputation_rounds"], minimum=0),
            _real("sprt.busy_probability", merged["busy_probability"]),
            _real("sprt.trust_floor", merged["trust_floor"]),
        )
    except DomainError as e:
        raise ConfigValidationError("sprt", str(e))


def parse_config(text, seed=None):
    """
    Parse and validate a run-config document.

    `seed`, when given, replaces the document's seed. Raises ConfigParseError
    for malformed YAML and ConfigValidationError naming the offending field.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ConfigParseError(e.problem or str(e), line)
    except yaml.YAMLError as e:
        raise ConfigParseError(str(e))
    if not isinstance(doc, dict):
        raise ConfigValidationError("document", "expected a mapping of sections")

    channel_sections = {}
    for section in doc:
        match = _CHANNEL_SECTION.match(str(section))
        if match:
            channel_sections[int(match.group(1))] = section
        elif section not in ("experiment", "sprt"):
            raise ConfigValidationError(str(section), "unknown section")
    if "experiment" not in doc:
        raise ConfigValidationError("experiment", "required section")
    exp = _check_keys("experiment", doc["experiment"], EXPERIMENT_KEYS)

    for key in ("mode", "output"):
        if key not in exp:
            raise ConfigValidationError(f"experiment.{key}", "required")
    mode = _choice("experiment.mode", exp["mode"], Mode)
    output = exp["output"]
    if not isinstance(output, str) or not output.strip():
        raise ConfigValidationError("experiment.output", "expected a non-empty path")

    if not channel_sections:
        raise ConfigValidationError("channel.1", "at least one channel section is required")
    noise_default = _real("experiment.noise_power", exp.get("noise_power", DEFAULT_NOISE_POWER))
    if not noise_default > 0:
        raise ConfigValidationError("experiment.noise_power", f"must be > 0, got {noise_default}")
    base_sweep = _sweep("experiment", exp, DEFAULT_SWEEP)

    channel_ids = tuple(sorted(channel_sections))
    channels, profiles, sweeps = [], [], []
    for cid in channel_ids:
        section = channel_sections[cid]
        channel, profile, body = _channel(section, doc[section], noise_default)
        channels.append(channel)
        profiles.append(profile)
        sweeps.append(_sweep(section, body, (base_sweep.start, base_sweep.stop, base_sweep.step)))

    rule = _rule(exp)
    if mode is Mode.COOPERATIVE and rule is None:
        raise ConfigValidationError("experiment.rule", "required for mode: cooperative")
    if mode is Mode.SINGLE_USER and rule is not None:
        raise ConfigValidationError("experiment.rule", "not used by mode: single_user")
    if rule is not None and rule.kind is RuleKind.K_RANK and rule.k > len(channels):
        raise ConfigValidationError("experiment.k", f"exceeds the {len(channels)} channels")

    sprt = None
    if "sprt" in doc:
        sprt = _sprt(doc["sprt"])
    elif mode is Mode.SPRT_ATTACK:
        raise ConfigValidationError("sprt", "required section for mode: sprt_attack")

    trust_floor = None
    if "trust_floor" in exp:
        trust_floor = _real("experiment.trust_floor", exp["trust_floor"])
        if not 0.0 <= trust_floor <= 1.0:
            raise ConfigValidationError("experiment.trust_floor",
                                        f"must lie in [0, 1], got {trust_floor}")
        # reputations are trained from the sprt section's rounds and state draws
        if sprt is None:
            raise ConfigValidationError("experiment.trust_floor",
                                        "needs an sprt section to train reputations")

    try:
        experiment = ExperimentSpec(
            channels=tuple(channels),
            sweeps=tuple(sweeps),
            n_samples=_integer("experiment.n_samples", exp.get("n_samples", DEFAULT_N_SAMPLES), 1),
            normalized=_flag("experiment.normalized", exp.get("normalized", False)),
            n_trials=_integer("experiment.n_trials", exp.get("n_trials", DEFAULT_N_TRIALS), 1),
            seed=_integer("experiment.seed", exp.get("seed", 0), 0) if seed is None else seed,
            rule=rule,
            counting=_choice("experiment.counting", exp.get("counting", "standard"), Counting),
            profiles=tuple(profiles),
            theory=_choice("experiment.theory", exp.get("theory", "gaussian"), TheoryModel),
            trust_floor=trust_floor,
            workers=_integer("experiment.workers", exp.get("workers", default_workers()), 1),
        )
    except DomainError as e:
        raise ConfigValidationError("experiment", str(e))

    return RunConfig(mode, experiment, output, sprt, channel_ids)


def serialize_config(config):
    """Fully defaulted YAML for a RunConfig; parse_config reads it back unchanged."""
    exp = config.experiment
    first = exp.sweeps[0]
    experiment = {
        "mode": config.mode.value,
        "output": config.output_path,
        "n_trials": exp.n_trials,
        "n_samples": exp.n_samples,
        "normalized": exp.normalized,
        "seed": exp.seed,
        "counting": exp.counting.value,
        "theory": exp.theory.value,
        "threshold_start": float(first.start),
        "threshold_stop": float(first.stop),
        "threshold_step": float(first.step),
        "workers": exp.workers,
    }
    if exp.rule is not None:
        experiment["rule"] = exp.rule.kind.value
        if exp.rule.kind is RuleKind.K_RANK:
            experiment["k"] = exp.rule.k
    if exp.trust_floor is not None:
        experiment["trust_floor"] = float(exp.trust_floor)

    doc = {"experiment": experiment}
    ids = config.channel_ids or tuple(range(1, len(exp.channels) + 1))
    for cid, channel, sweep, profile in zip(ids, exp.channels, exp.sweeps, exp.profiles):
        body = {
            "snr_db": float(channel.snr_db),
            "noise_power": float(channel.noise_power),
            "fading": channel.fading.value,
            "threshold_start": float(sweep.start),
            "threshold_stop": float(sweep.stop),
            "threshold_step": float(sweep.step),
            "profile": profile.behavior.value,
        }
        if channel.fading is Fading.RAYLEIGH:
            body["mean_snr"] = float(channel.mean_snr)
        if profile.behavior is Behavior.INTERMITTENT:
            body["lie_probability"] = float(profile.lie_probability)
        doc[f"channel.{cid}"] = body

    if config.sprt is not None:
        s = config.sprt
        doc["sprt"] = {
            "alpha": s.config.alpha, "beta": s.config.beta,
            "p_h1": s.config.p_h1, "p_h0": s.config.p_h0,
            "max_reports": s.config.max_reports,
            "reputation_rounds": s.reputation_rounds,
            "busy_probability": float(s.busy_probability),
            "trust_floor": float(s.trust_floor),
        }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def load_config(path):
    """Read and parse a run config file, applying SENSING_SEED when set."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    return parse_config(text, seed=seed_override())
