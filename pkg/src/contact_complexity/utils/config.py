"""
Configuration management for the contact-complexity pipeline.

This module provides centralized configuration with environment variable
support, YAML files, type safety, and sensible defaults.
"""

import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator


class TextConfig(BaseModel):
    """TF-IDF embedding configuration."""

    max_features: int = Field(
        20000,
        ge=1,
        description="Vocabulary cap, highest document frequency first",
    )


class TrainConfig(BaseModel):
    """Gradient boosting configuration for the AI expert."""

    rounds: int = Field(60, ge=1, le=10000, description="Boosting rounds M")
    learning_rate: float = Field(0.1, gt=0.0, le=1.0, description="Shrinkage eta")
    max_depth: int = Field(4, ge=1, le=16, description="Maximum tree depth")
    min_samples_leaf: int = Field(5, ge=1, description="Minimum samples per leaf")
    l2_regularization: float = Field(1.0, ge=0.0, description="L2 leaf regularizer lambda")
    min_split_gain: float = Field(1e-12, ge=0.0, description="Smallest gain that creates a split")
    seed: int = Field(0, ge=0, description="Seed for the holdout split")
    holdout_fraction: float = Field(
        0.2,
        ge=0.0,
        le=0.9,
        description="Share of the corpus held out for the accuracy report",
    )
    top_k: List[int] = Field(
        default_factory=lambda: [1, 3, 15],
        description="k values reported as top-k accuracy",
    )

    @field_validator("top_k")
    @classmethod
    def validate_top_k(cls, v: List[int]) -> List[int]:
        """Every k must be at least 1."""
        if any(k < 1 for k in v):
            raise ValueError("top_k values must be >= 1")
        return v


class QuantileConfig(BaseModel):
    """Quantile transformation configuration."""

    max_references: int = Field(
        1000,
        ge=2,
        le=100000,
        description="Maximum stored order statistics (Qmax)",
    )
    epsilon: float = Field(
        1e-7,
        gt=0.0,
        lt=0.5,
        description="Clip epsilon for the uniform target",
    )


class ComplexityConfig(BaseModel):
    """Combiner configuration."""

    w: float = Field(2.0, gt=0.0, description="Weight on the normalized length hypothesis")
    skewness_weights: List[float] = Field(
        default_factory=lambda: [1.0, 2.0, 3.0],
        description="Length weights swept by the skewness report",
    )

    @field_validator("skewness_weights")
    @classmethod
    def validate_weights(cls, v: List[float]) -> List[float]:
        """Every swept weight must be positive."""
        if any(w <= 0 for w in v):
            raise ValueError("skewness weights must be positive")
        return v


class RoutingConfig(BaseModel):
    """Two-stage routing configuration."""

    low_threshold: float = Field(0.05, gt=0.0, lt=1.0, description="Q below this goes junior")
    high_threshold: float = Field(0.95, gt=0.0, lt=1.0, description="Q above this goes senior")
    queue_map: Dict[str, str] = Field(
        default_factory=dict,
        description="SIC code to product queue",
    )
    queue_map_file: Optional[Path] = Field(
        None,
        description="CSV file with a sic,queue header merged into queue_map",
    )
    default_queue: str = Field(
        "general",
        min_length=1,
        description="Queue for SIC codes missing from the map",
    )

    @model_validator(mode="after")
    def validate_thresholds(self) -> "RoutingConfig":
        """Thresholds must satisfy 0 < low < high < 1."""
        if not self.low_threshold < self.high_threshold:
            raise ValueError(
                f"low_threshold ({self.low_threshold}) must be below "
                f"high_threshold ({self.high_threshold})"
            )
        return self


class SynthConfig(BaseModel):
    """Synthetic corpus generator configuration."""

    seed: int = Field(0, ge=0, description="RNG seed")
    n_classes: int = Field(10, ge=2, le=1000, description="Number of SIC classes K")
    n_transcripts: int = Field(5000, ge=2, description="Corpus size n")
    easy_fraction: float = Field(0.5, ge=0.0, le=1.0, description="Share of easy contacts")
    medium_fraction: float = Field(0.0, ge=0.0, le=1.0, description="Share of medium contacts")
    class_vocabulary_size: int = Field(30, ge=1, description="Tokens per class vocabulary")
    shared_vocabulary_size: int = Field(120, ge=1, description="Tokens shared by all classes")
    easy_agent_turns: Tuple[int, int] = Field((2, 6), description="Agent turns for easy contacts")
    hard_agent_turns: Tuple[int, int] = Field((10, 30), description="Agent turns for hard contacts")
    words_per_turn: Tuple[int, int] = Field((4, 10), description="Tokens per utterance")
    class_token_rate: float = Field(
        0.5,
        gt=0.0,
        le=1.0,
        description="Share of tokens drawn from a class vocabulary rather than the shared one",
    )
    mixing_rate: float = Field(
        0.6,
        ge=0.0,
        le=1.0,
        description="Share of class tokens in hard contacts drawn from confusable classes",
    )
    confusable_classes: int = Field(3, ge=1, description="Other classes mixed into hard contacts")
    easy_resolved: float = Field(0.85, ge=0.0, le=1.0, description="P(resolved) for easy contacts")
    easy_transferred: float = Field(
        0.11, ge=0.0, le=1.0, description="P(transferred) for easy contacts"
    )
    hard_resolved: float = Field(0.26, ge=0.0, le=1.0, description="P(resolved) for hard contacts")
    hard_transferred: float = Field(
        0.62, ge=0.0, le=1.0, description="P(transferred) for hard contacts"
    )

    @field_validator("easy_agent_turns", "hard_agent_turns", "words_per_turn")
    @classmethod
    def validate_range(cls, v: Tuple[int, int], info) -> Tuple[int, int]:
        """Ranges are inclusive and non-empty."""
        low, high = v
        if low < 1 or high < low:
            raise ValueError(f"{info.field_name} must satisfy 1 <= low <= high, got {v}")
        return v

    @model_validator(mode="after")
    def validate_layout(self) -> "SynthConfig":
        """Check cross-field invariants."""
        if self.n_transcripts < self.n_classes:
            raise ValueError("n_transcripts must be at least n_classes")
        if self.hard_agent_turns[0] <= self.easy_agent_turns[1]:
            raise ValueError("hard agent-turn minimum must exceed the easy maximum")
        if self.easy_fraction + self.medium_fraction > 1.0:
            raise ValueError("easy_fraction + medium_fraction must not exceed 1")
        if self.confusable_classes >= self.n_classes:
            raise ValueError("confusable_classes must be below n_classes")
        return self


class EvaluationConfig(BaseModel):
    """Evaluation configuration."""

    n_bins: int = Field(20, ge=1, le=1000, description="Q intervals for label curves")
    histogram_bins: int = Field(20, ge=1, le=1000, description="Bins for hypothesis histograms")


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(
        "INFO",
        description="Logging level",
        pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$",
    )
    file: Optional[Path] = Field(
        None,
        description="Log file path",
    )
    max_size_mb: int = Field(
        100,
        ge=1,
        le=1000,
        description="Maximum log file size in MB",
    )
    rotate_count: int = Field(
        5,
        ge=1,
        le=10,
        description="Number of rotated log files to keep",
    )


class Config(BaseModel):
    """Main configuration class."""

    text: TextConfig = Field(default_factory=TextConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    quantiles: QuantileConfig = Field(default_factory=QuantileConfig)
    complexity: ComplexityConfig = Field(default_factory=ComplexityConfig)
    routing: RoutingConfig = Field(default_factory=RoutingConfig)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "Config":
        """
        Load configuration from environment variables.

        Args:
            env_file: Optional path to .env file

        Returns:
            Configured Config instance
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()  # Load from default .env

        config_dict = {}

        if max_features := os.getenv("CC_MAX_FEATURES"):
            config_dict["text"] = TextConfig(max_features=int(max_features))

        # Training and generator share the seed
        train_config = {}
        synth_config = {}
        if seed := os.getenv("CC_SEED"):
            train_config["seed"] = int(seed)
            synth_config["seed"] = int(seed)
        if rounds := os.getenv("CC_ROUNDS"):
            train_config["rounds"] = int(rounds)
        if learning_rate := os.getenv("CC_LEARNING_RATE"):
            train_config["learning_rate"] = float(learning_rate)
        if train_config:
            config_dict["train"] = TrainConfig(**train_config)
        if synth_config:
            config_dict["synth"] = SynthConfig(**synth_config)

        if weight := os.getenv("CC_WEIGHT"):
            config_dict["complexity"] = ComplexityConfig(w=float(weight))

        routing_config = {}
        if low := os.getenv("CC_LOW_THRESHOLD"):
            routing_config["low_threshold"] = float(low)
        if high := os.getenv("CC_HIGH_THRESHOLD"):
            routing_config["high_threshold"] = float(high)
        if default_queue := os.getenv("CC_DEFAULT_QUEUE"):
            routing_config["default_queue"] = default_queue
        if routing_config:
            config_dict["routing"] = RoutingConfig(**routing_config)

        logging_config = {}
        if log_level := os.getenv("CC_LOG_LEVEL"):
            logging_config["level"] = log_level
        if log_file := os.getenv("CC_LOG_FILE"):
            logging_config["file"] = Path(log_file)
        if logging_config:
            config_dict["logging"] = LoggingConfig(**logging_config)

        return cls(**config_dict)

    @classmethod
    def from_yaml(cls, yaml_file: str) -> "Config":
        """
        Load configuration from YAML file.

        Args:
            yaml_file: Path to YAML configuration file

        Returns:
            Configured Config instance
        """
        with open(yaml_file, "r", encoding="utf-8") as f:
            config_dict = yaml.safe_load(f) or {}
        return cls(**config_dict)

    def to_yaml(self, yaml_file: str) -> None:
        """
        Save configuration to YAML file.

        Args:
            yaml_file: Path to save YAML configuration
        """
        with open(yaml_file, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.model_dump(mode="json"), f, default_flow_style=False)

    def with_seed(self, seed: int) -> "Config":
        """Copy with both the training and generator seeds replaced."""
        return self.model_copy(
            update={
                "train": self.train.model_copy(update={"seed": seed}),
                "synth": self.synth.model_copy(update={"seed": seed}),
            }
        )


# Global configuration instance
_config: Optional[Config] = None


def get_config() -> Config:
    """
    Get the global configuration instance.

    Returns:
        The global Config instance
    """
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def set_config(config: Optional[Config]) -> None:
    """
    Set the global configuration instance.

    Args:
        config: Config instance to set globally, or None to reload from the
            environment on next access
    """
    global _config
    _config = config
