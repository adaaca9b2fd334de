"""Config defaults, file parsing, env overrides, round trips."""

import pytest

from iabsim.config import (
    ALLOCATOR_PRESETS,
    ExperimentConfig,
    apply_env_overrides,
    default_config,
    load_config,
    parse_config,
    serialize_config,
)
from iabsim.errors import ConfigurationError


class TestDefaults:
    def test_table_defaults_validate(self):
        cfg = default_config()
        cfg.validate()

    def test_scheduler_defaults(self):
        s = default_config().scheduler
        assert (s.alpha, s.gamma, s.batch_size, s.target_sync) == (0.001, 0.99, 32, 2)
        assert (s.episodes, s.epsilon0, s.epsilon_decay, s.epsilon_min) == (1000, 0.9, 0.995, 0.01)

    def test_allocator_presets(self):
        one, two = ALLOCATOR_PRESETS[1], ALLOCATOR_PRESETS[2]
        assert (one.hidden_layers, one.episodes, one.epsilon_decay) == (2, 500, 0.99)
        assert (two.hidden_layers, two.episodes, two.epsilon_decay) == (1, 21, 0.01)
        for preset in (one, two):
            assert (preset.alpha, preset.batch_size, preset.epsilon0) == (0.0001, 64, 0.99)

    def test_scenario_defaults(self):
        sc = default_config().scenario
        assert (sc.num_bs, sc.num_ue, sc.antennas_per_bs, sc.cap_mb) == (7, 10, 14, 25000)


class TestParsing:
    def test_round_trip_idempotent(self):
        cfg = default_config()
        text = serialize_config(cfg)
        assert parse_config(text) == cfg
        assert serialize_config(parse_config(text)) == text

    def test_round_trip_with_overrides(self):
        text = "scheduler.alpha = 0.005\nscenario.num_ue = 4\nseeds.train = 77\n"
        cfg = parse_config(text)
        assert cfg.scheduler.alpha == 0.005
        assert cfg.scenario.num_ue == 4
        assert cfg.train_seed == 77
        assert parse_config(serialize_config(cfg)) == cfg

    def test_comments_and_blanks_ignored(self):
        cfg = parse_config("# a comment\n\nscheduler.gamma = 0.9  # trailing\n")
        assert cfg.scheduler.gamma == 0.9

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown key"):
            parse_config("scheduler.learning = 1\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigurationError, match="bad value"):
            parse_config("scheduler.episodes = many\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_config("scheduler.alpha 0.1\n")


class TestEnvOverrides:
    def test_env_overrides_apply(self):
        cfg = apply_env_overrides(
            default_config(),
            {"IABSIM_SCHEDULER__ALPHA": "0.002", "IABSIM_SEEDS__EVAL": "31"},
        )
        assert cfg.scheduler.alpha == 0.002
        assert cfg.eval_seed == 31

    def test_env_wins_over_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("scheduler.alpha = 0.5\n")
        cfg = load_config(str(path), {"IABSIM_SCHEDULER__ALPHA": "0.25"})
        assert cfg.scheduler.alpha == 0.25

    def test_unrelated_env_ignored(self):
        cfg = apply_env_overrides(default_config(), {"PATH": "/bin"})
        assert cfg == default_config()


class TestValidation:
    def test_unreadable_file_is_config_error(self):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_config("/nonexistent/path.cfg")

    def test_gamma_out_of_range(self):
        cfg = parse_config("scheduler.gamma = 1.5\n")
        with pytest.raises(ConfigurationError):
            cfg.validate()

    def test_max_links_below_candidates(self):
        cfg = parse_config("scheduler.max_links = 10\n")
        with pytest.raises(ConfigurationError, match="max_links"):
            cfg.validate()

    def test_epsilon_floor_above_initial(self):
        cfg = parse_config("allocator.epsilon_min = 1.5\n")
        with pytest.raises(ConfigurationError):
            cfg.validate()
