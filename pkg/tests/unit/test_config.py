"""
Unit tests for configuration management.
"""

import os
from pathlib import Path
from unittest.mock import patch

import pytest
import yaml
from pydantic import ValidationError

from contact_complexity.utils.config import (
    ComplexityConfig,
    Config,
    LoggingConfig,
    QuantileConfig,
    RoutingConfig,
    SynthConfig,
    TrainConfig,
    get_config,
    set_config,
)


class TestTrainConfig:
    """Test boosting configuration."""

    @pytest.mark.unit
    @pytest.mark.config
    def test_default_values(self):
        """Test default training values."""
        config = TrainConfig()
        assert config.rounds == 60
        assert config.learning_rate == 0.1
        assert config.max_depth == 4
        assert config.min_samples_leaf == 5
        assert config.l2_regularization == 1.0
        assert config.top_k == [1, 3, 15]

    @pytest.mark.unit
    @pytest.mark.config
    def test_bounds(self):
        """Test that out-of-range values are rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(rounds=0)
        with pytest.raises(ValidationError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValidationError):
            TrainConfig(learning_rate=1.5)
        with pytest.raises(ValidationError):
            TrainConfig(max_depth=0)
        with pytest.raises(ValidationError):
            TrainConfig(l2_regularization=-1.0)

    @pytest.mark.unit
    @pytest.mark.config
    def test_top_k_must_be_positive(self):
        """Test top-k validation."""
        with pytest.raises(ValidationError, match="top_k"):
            TrainConfig(top_k=[1, 0])


class TestQuantileAndComplexityConfig:
    """Test quantile and combiner configuration."""

    @pytest.mark.unit
    @pytest.mark.config
    def test_defaults(self):
        """Test default reference cap, epsilon and weight."""
        assert QuantileConfig().max_references == 1000
        assert QuantileConfig().epsilon == 1e-7
        assert ComplexityConfig().w == 2.0
        assert ComplexityConfig().skewness_weights == [1.0, 2.0, 3.0]

    @pytest.mark.unit
    @pytest.mark.config
    def test_invalid_values(self):
        """Test that invalid values are rejected."""
        with pytest.raises(ValidationError):
            QuantileConfig(max_references=1)
        with pytest.raises(ValidationError):
            QuantileConfig(epsilon=0.0)
        with pytest.raises(ValidationError):
            ComplexityConfig(w=0.0)
        with pytest.raises(ValidationError):
            ComplexityConfig(skewness_weights=[1.0, -2.0])


class TestRoutingConfig:
    """Test routing configuration."""

    @pytest.mark.unit
    @pytest.mark.config
    def test_default_values(self):
        """Test default thresholds and queue."""
        config = RoutingConfig()
        assert config.low_threshold == 0.05
        assert config.high_threshold == 0.95
        assert config.queue_map == {}
        assert config.queue_map_file is None
        assert config.default_queue == "general"

    @pytest.mark.unit
    @pytest.mark.config
    def test_thresholds_must_be_ordered(self):
        """Test that low must stay below high."""
        with pytest.raises(ValidationError, match="low_threshold"):
            RoutingConfig(low_threshold=0.6, high_threshold=0.4)
        with pytest.raises(ValidationError):
            RoutingConfig(low_threshold=0.5, high_threshold=0.5)

    @pytest.mark.unit
    @pytest.mark.config
    def test_thresholds_inside_unit_interval(self):
        """Test open-interval bounds."""
        with pytest.raises(ValidationError):
            RoutingConfig(low_threshold=0.0)
        with pytest.raises(ValidationError):
            RoutingConfig(high_threshold=1.0)

    @pytest.mark.unit
    @pytest.mark.config
    def test_empty_default_queue_rejected(self):
        """Test default queue validation."""
        with pytest.raises(ValidationError):
            RoutingConfig(default_queue="")


class TestSynthConfig:
    """Test generator configuration."""

    @pytest.mark.unit
    @pytest.mark.config
    def test_default_values(self):
        """Test default generator values."""
        config = SynthConfig()
        assert config.n_classes == 10
        assert config.n_transcripts == 5000
        assert config.easy_fraction == 0.5
        assert config.easy_agent_turns == (2, 6)
        assert config.hard_agent_turns == (10, 30)

    @pytest.mark.unit
    @pytest.mark.config
    def test_overlapping_turn_ranges_rejected(self):
        """Test that hard contacts must be longer than easy ones."""
        with pytest.raises(ValidationError, match="hard agent-turn"):
            SynthConfig(easy_agent_turns=(2, 12), hard_agent_turns=(10, 30))

    @pytest.mark.unit
    @pytest.mark.config
    def test_invalid_range(self):
        """Test inverted and zero ranges."""
        with pytest.raises(ValidationError):
            SynthConfig(words_per_turn=(5, 3))
        with pytest.raises(ValidationError):
            SynthConfig(easy_agent_turns=(0, 3))

    @pytest.mark.unit
    @pytest.mark.config
    def test_layout_invariants(self):
        """Test cross-field constraints."""
        with pytest.raises(ValidationError):
            SynthConfig(n_classes=10, n_transcripts=5)
        with pytest.raises(ValidationError):
            SynthConfig(easy_fraction=0.7, medium_fraction=0.5)
        with pytest.raises(ValidationError):
            SynthConfig(n_classes=3, confusable_classes=3)


class TestLoggingConfig:
    """Test logging configuration."""

    @pytest.mark.unit
    @pytest.mark.config
    def test_valid_levels(self):
        """Test valid log levels."""
        for level in ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]:
            assert LoggingConfig(level=level).level == level

    @pytest.mark.unit
    @pytest.mark.config
    def test_invalid_level(self):
        """Test invalid log level."""
        with pytest.raises(ValidationError):
            LoggingConfig(level="VERBOSE")


class TestConfig:
    """Test main configuration class."""

    @pytest.mark.unit
    @pytest.mark.config
    def test_default_config(self):
        """Test default configuration creation."""
        config = Config()
        assert config.text.max_features == 20000
        assert config.train.rounds == 60
        assert config.routing.default_queue == "general"
        assert config.evaluation.n_bins == 20
        assert config.logging.level == "INFO"

    @pytest.mark.unit
    @pytest.mark.config
    def test_from_env(self, mock_env_vars):
        """Test loading configuration from environment variables."""
        config = Config.from_env()

        assert config.text.max_features == 1000
        assert config.train.seed == 11
        assert config.synth.seed == 11
        assert config.train.rounds == 30
        assert config.train.learning_rate == 0.05
        assert config.complexity.w == 3.0
        assert config.routing.low_threshold == 0.2
        assert config.routing.high_threshold == 0.8
        assert config.routing.default_queue == "fallback"
        assert config.logging.level == "DEBUG"

    @pytest.mark.unit
    @pytest.mark.config
    def test_from_env_invalid_threshold(self):
        """Test that invalid environment values fail validation."""
        with patch.dict(os.environ, {"CC_LOW_THRESHOLD": "0.9", "CC_HIGH_THRESHOLD": "0.1"}):
            with pytest.raises(ValidationError):
                Config.from_env()

    @pytest.mark.unit
    @pytest.mark.config
    def test_from_env_file(self, temp_dir):
        """Test loading variables from a .env file."""
        env_file = temp_dir / "test.env"
        env_file.write_text("CC_ROUNDS=7\n", encoding="utf-8")
        try:
            config = Config.from_env(str(env_file))
            assert config.train.rounds == 7
        finally:
            os.environ.pop("CC_ROUNDS", None)

    @pytest.mark.unit
    @pytest.mark.config
    def test_from_yaml(self, sample_yaml_config):
        """Test loading configuration from YAML file."""
        config = Config.from_yaml(str(sample_yaml_config))

        assert config.text.max_features == 500
        assert config.train.rounds == 20
        assert config.train.learning_rate == 0.2
        assert config.complexity.w == 1.5
        assert config.routing.queue_map == {"1": "billing"}
        assert config.routing.default_queue == "triage"
        assert config.synth.n_classes == 5
        # Untouched sections keep their defaults
        assert config.quantiles.max_references == 1000

    @pytest.mark.unit
    @pytest.mark.config
    def test_empty_yaml(self, temp_dir):
        """Test that an empty YAML file yields defaults."""
        path = temp_dir / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert Config.from_yaml(str(path)) == Config()

    @pytest.mark.unit
    @pytest.mark.config
    def test_to_yaml(self, temp_dir):
        """Test saving configuration to YAML file."""
        config = Config(
            train=TrainConfig(rounds=9),
            routing=RoutingConfig(queue_map={"3": "hardware"}),
            logging=LoggingConfig(file=Path("run.log")),
        )
        yaml_file = temp_dir / "saved.yaml"
        config.to_yaml(str(yaml_file))

        with open(yaml_file, "r", encoding="utf-8") as f:
            saved = yaml.safe_load(f)
        assert saved["train"]["rounds"] == 9
        assert saved["routing"]["queue_map"] == {"3": "hardware"}
        assert saved["synth"]["easy_agent_turns"] == [2, 6]

        assert Config.from_yaml(str(yaml_file)) == config

    @pytest.mark.unit
    @pytest.mark.config
    def test_with_seed(self):
        """Test that with_seed replaces both seeds and leaves the original intact."""
        config = Config()
        seeded = config.with_seed(42)
        assert seeded.train.seed == 42
        assert seeded.synth.seed == 42
        assert config.train.seed == 0

    @pytest.mark.unit
    @pytest.mark.config
    def test_global_config(self):
        """Test the process-wide configuration accessor."""
        config = Config(train=TrainConfig(rounds=3))
        set_config(config)
        assert get_config() is config

        set_config(None)
        assert get_config().train.rounds == 60
