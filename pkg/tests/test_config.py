import os
import textwrap

import pytest

from config import Mode, RunConfig, load_config, parse_config, resolve_output, serialize_config
from errors import ConfigError, ConfigParseError, ConfigValidationError
from fusion import Behavior, FusionRule, RuleKind
from montecarlo import Counting, TheoryModel
from signal_model import Fading

MINIMAL = """
experiment:
  mode: single_user
  output: roc.csv
  threshold_start: 200
  threshold_stop: 600
  threshold_step: 20
channel.1:
  snr_db: 5
"""


def _doc(text):
    return textwrap.dedent(text)


class TestParseConfig:
    def test_minimal_single_user_defaults(self):
        cfg = parse_config(MINIMAL)
        assert isinstance(cfg, RunConfig)
        assert cfg.mode is Mode.SINGLE_USER
        assert cfg.output_path == "roc.csv"
        exp = cfg.experiment
        assert exp.n_trials == 5000
        assert exp.n_samples == 100
        assert exp.counting is Counting.STANDARD
        assert exp.theory is TheoryModel.GAUSSIAN
        assert exp.channels[0].noise_power == 4.0
        assert exp.sweeps[0].values()[-1] == 600.0
        assert cfg.channel_ids == (1,)
        assert cfg.sprt is None

    def test_zero_step_names_the_field(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL.replace("threshold_step: 20", "threshold_step: 0"))
        assert exc.value.field == "experiment.threshold_step"

    def test_unknown_key_named(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL.replace("threshold_start: 200", "thresh_hold: 200"))
        assert "thresh_hold" in str(exc.value)

    def test_unknown_channel_key_named(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL + "  snr: 3\n")
        assert exc.value.field == "channel.1.snr"

    def test_unknown_section(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL + "extras:\n  a: 1\n")
        assert exc.value.field == "extras"

    def test_malformed_yaml_reports_line(self):
        with pytest.raises(ConfigParseError) as exc:
            parse_config("experiment:\n  mode: single_user\n  output: [roc.csv\nchannel.1:\n")
        assert exc.value.line is not None and exc.value.line >= 3
        assert str(exc.value).startswith("line ")

    def test_document_must_be_mapping(self):
        with pytest.raises(ConfigValidationError):
            parse_config("- just\n- a list\n")

    def test_cooperative_requires_rule(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL.replace("single_user", "cooperative"))
        assert exc.value.field == "experiment.rule"

    def test_single_user_rejects_rule(self):
        with pytest.raises(ConfigValidationError):
            parse_config(MINIMAL.replace("  output: roc.csv", "  output: roc.csv\n  rule: or"))

    def test_k_rank_needs_k(self):
        text = MINIMAL.replace("single_user", "cooperative").replace(
            "  output: roc.csv", "  output: roc.csv\n  rule: k_rank")
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(text)
        assert exc.value.field == "experiment.k"

    def test_k_beyond_channels(self):
        text = MINIMAL.replace("single_user", "cooperative").replace(
            "  output: roc.csv", "  output: roc.csv\n  rule: k_rank\n  k: 2")
        with pytest.raises(ConfigValidationError):
            parse_config(text)

    def test_sprt_attack_requires_sprt_section(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL.replace("single_user", "sprt_attack"))
        assert exc.value.field == "sprt"

    def test_sprt_section_checked(self):
        text = MINIMAL.replace("single_user", "sprt_attack") + _doc("""
            sprt:
              alpha: 0.1
              beta: 0.1
              p_h1: 0.3
              p_h0: 0.6
        """)
        with pytest.raises(ConfigValidationError):
            parse_config(text)

    def test_channel_overrides(self):
        cfg = parse_config(MINIMAL + _doc("""
            channel.2:
              snr_db: -8
              fading: rayleigh
              mean_snr: 0.5
              threshold_start: 500
              threshold_stop: 900
              threshold_step: 20
              profile: intermittent
              lie_probability: 0.25
        """))
        exp = cfg.experiment
        assert cfg.channel_ids == (1, 2)
        assert exp.channels[1].fading is Fading.RAYLEIGH
        assert exp.channels[1].mean_snr == 0.5
        assert exp.sweeps[1].start == 500.0
        assert exp.sweeps[0].start == 200.0
        assert exp.profiles[1].behavior is Behavior.INTERMITTENT
        assert exp.profiles[1].lie_probability == 0.25

    def test_mean_snr_only_for_rayleigh(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL + "  mean_snr: 2\n")
        assert exc.value.field == "channel.1.mean_snr"

    def test_type_errors_name_the_field(self):
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(MINIMAL.replace("snr_db: 5", "snr_db: loud"))
        assert exc.value.field == "channel.1.snr_db"

    def test_missing_channels(self):
        with pytest.raises(ConfigValidationError):
            parse_config(MINIMAL.split("channel.1")[0])

    def test_seed_argument_wins(self):
        assert parse_config(MINIMAL + "", seed=77).experiment.seed == 77

    def test_trust_floor_needs_sprt_section(self):
        text = MINIMAL.replace("single_user", "cooperative").replace(
            "  output: roc.csv", "  output: roc.csv\n  rule: or\n  trust_floor: 0.4")
        with pytest.raises(ConfigValidationError) as exc:
            parse_config(text)
        assert exc.value.field == "experiment.trust_floor"

    def test_trust_floor_with_sprt_section(self):
        text = MINIMAL.replace("single_user", "cooperative").replace(
            "  output: roc.csv", "  output: roc.csv\n  rule: or\n  trust_floor: 0.4") + _doc("""
            sprt:
              alpha: 0.1
              beta: 0.1
              p_h1: 0.9
              p_h0: 0.1
        """)
        cfg = parse_config(text)
        assert cfg.experiment.trust_floor == 0.4
        assert cfg.sprt.reputation_rounds == 50


class TestSerializeConfig:
    @pytest.mark.parametrize("name", [
        "single_user.yaml", "cooperative_and.yaml", "cooperative_or.yaml",
        "cooperative_krank.yaml", "cooperative_and_5.yaml", "cooperative_or_5.yaml",
        "cooperative_krank_5.yaml", "sprt_attack.yaml",
    ])
    def test_round_trip_is_identity(self, configs_dir, name):
        cfg = load_config(os.path.join(configs_dir, name))
        text = serialize_config(cfg)
        assert parse_config(text) == cfg
        assert serialize_config(parse_config(text)) == text

    def test_k_rank_serialized(self, configs_dir):
        cfg = load_config(os.path.join(configs_dir, "cooperative_krank.yaml"))
        assert cfg.experiment.rule.kind is RuleKind.K_RANK
        assert "k: 2" in serialize_config(cfg)


class TestLoadConfig:
    def test_missing_file_names_path(self, tmp_path):
        path = str(tmp_path / "missing.yaml")
        with pytest.raises(ConfigError) as exc:
            load_config(path)
        assert path in str(exc.value)

    def test_seed_override_from_environment(self, write_config, monkeypatch):
        path = write_config(MINIMAL)
        assert load_config(path).experiment.seed == 0
        monkeypatch.setenv("SENSING_SEED", "1234")
        assert load_config(path).experiment.seed == 1234

    def test_bad_seed_override(self, write_config, monkeypatch):
        path = write_config(MINIMAL)
        monkeypatch.setenv("SENSING_SEED", "abc")
        with pytest.raises(ConfigValidationError):
            load_config(path)

    def test_negative_seed_override_rejected(self, write_config, monkeypatch):
        path = write_config(MINIMAL)
        monkeypatch.setenv("SENSING_SEED", "-5")
        with pytest.raises(ConfigValidationError) as exc:
            load_config(path)
        assert exc.value.field == "SENSING_SEED"

    def test_workers_from_environment(self, write_config, monkeypatch):
        path = write_config(MINIMAL)
        assert load_config(path).experiment.workers == 1
        monkeypatch.setenv("SENSING_WORKERS", "3")
        assert load_config(path).experiment.workers == 3

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_bad_workers_from_environment(self, write_config, monkeypatch, raw):
        path = write_config(MINIMAL)
        monkeypatch.setenv("SENSING_WORKERS", raw)
        with pytest.raises(ConfigValidationError) as exc:
            load_config(path)
        assert exc.value.field == "SENSING_WORKERS"

    def test_canned_configs_modes(self, configs_dir):
        modes = {
            name: load_config(os.path.join(configs_dir, name)).mode
            for name in sorted(os.listdir(configs_dir))
        }
        assert modes["single_user.yaml"] is Mode.SINGLE_USER
        assert modes["sprt_attack.yaml"] is Mode.SPRT_ATTACK
        assert modes["cooperative_or.yaml"] is Mode.COOPERATIVE

    @pytest.mark.parametrize("name,users,rule", [
        ("cooperative_and.yaml", 3, FusionRule.and_()),
        ("cooperative_krank.yaml", 3, FusionRule.k_rank(2)),
        ("cooperative_and_5.yaml", 5, FusionRule.and_()),
        ("cooperative_or_5.yaml", 5, FusionRule.or_()),
        ("cooperative_krank_5.yaml", 5, FusionRule.k_rank(3)),
    ])
    def test_cooperative_populations(self, configs_dir, name, users, rule):
        spec = load_config(os.path.join(configs_dir, name)).experiment
        assert len(spec.channels) == users
        assert spec.rule == rule
        assert all(ch.snr_db == -8.0 for ch in spec.channels)


def test_resolve_output_keeps_absolute_paths(tmp_path):
    path = str(tmp_path / "x.csv")
    assert resolve_output(path) == path
    assert os.path.isabs(resolve_output("x.csv"))
