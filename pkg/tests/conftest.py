"""
Pytest fixtures for contact-complexity tests.

Provides reusable test fixtures including:
- Hand-written transcripts and corpora
- A hand-built three-round ensemble
- A small synthetic corpus and a model trained on it
- Temporary directories and configuration files
"""

from pathlib import Path
from typing import List

import numpy as np
import pytest
import yaml

from contact_complexity.gbdt import Ensemble, Tree, train
from contact_complexity.scoring import ComplexityModel, fit_scorer
from contact_complexity.synth import generate_corpus
from contact_complexity.textfeat import fit_vocabulary, transform_corpus
from contact_complexity.types import Speaker, Transcript, Utterance
from contact_complexity.utils.config import SynthConfig, TrainConfig, set_config
from contact_complexity.gbdt import encode_labels


def make_transcript(id: str, *turns, **meta) -> Transcript:
    """Build a transcript from (speaker, text) pairs."""
    return Transcript(
        id=id,
        utterances=tuple(Utterance(speaker=Speaker(s), text=text) for s, text in turns),
        **meta,
    )


@pytest.fixture
def temp_dir(tmp_path) -> Path:
    """
    Provide a temporary directory for testing.

    Args:
        tmp_path: Pytest's tmp_path fixture

    Returns:
        Path object to temporary test directory
    """
    test_dir = tmp_path / "work"
    test_dir.mkdir(exist_ok=True)
    return test_dir


@pytest.fixture
def fruit_corpus() -> List[Transcript]:
    """
    Three one-utterance documents with known document frequencies.

    Returns:
        Transcripts "red apple", "red pear", "blue pear"
    """
    return [
        make_transcript("d1", ("customer", "red apple")),
        make_transcript("d2", ("customer", "red pear")),
        make_transcript("d3", ("agent", "blue pear")),
    ]


@pytest.fixture
def support_transcript() -> Transcript:
    """
    A realistic transcript: 3 agent, 5 customer and 1 bot utterance.

    Returns:
        Transcript with outcome metadata
    """
    return make_transcript(
        "t-support",
        ("bot", "Welcome! How can we help?"),
        ("customer", "My Kindle won't charge"),
        ("customer", "I tried another cable"),
        ("agent", "Sorry to hear that. Which model is it?"),
        ("customer", "Paperwhite"),
        ("agent", "Please hold the power button for 40 seconds"),
        ("customer", "It works now"),
        ("customer", "Thanks"),
        ("agent", "Glad to help"),
        sic="42",
        resolved=True,
        transferred=False,
    )


@pytest.fixture
def three_round_ensemble() -> Ensemble:
    """
    Hand-built 3-round, 3-class ensemble over features 0 and 1.

    Returns:
        Ensemble with depth-1 and depth-2 trees and a non-uniform prior
    """
    stump = Tree.split
    leaf = Tree.leaf
    rounds = (
        (
            stump(0, 0.5, leaf(-0.2), leaf(0.6)),
            stump(1, 0.3, leaf(0.1), leaf(0.4)),
            leaf(-0.05),
        ),
        (
            stump(0, 0.2, stump(1, 0.1, leaf(0.05), leaf(-0.1)), leaf(0.3)),
            leaf(0.02),
            stump(1, 0.6, leaf(-0.15), leaf(0.25)),
        ),
        (
            leaf(0.01),
            stump(0, 0.8, leaf(0.2), leaf(-0.3)),
            stump(0, 0.1, leaf(0.12), leaf(-0.07)),
        ),
    )
    return Ensemble(
        n_classes=3,
        learning_rate=0.1,
        base_score=np.log(np.array([0.5, 0.3, 0.2])),
        trees=rounds,
        n_features=2,
    )


@pytest.fixture(scope="session")
def small_synth_config() -> SynthConfig:
    """
    Small generator configuration for fast pipeline tests.

    Returns:
        SynthConfig with 240 transcripts over 4 classes
    """
    return SynthConfig(seed=7, n_classes=4, n_transcripts=240, confusable_classes=2)


@pytest.fixture(scope="session")
def small_corpus(small_synth_config) -> List[Transcript]:
    """
    Synthetic corpus shared by the whole session.

    Returns:
        Generated transcripts, half easy and half hard
    """
    return generate_corpus(small_synth_config)


@pytest.fixture(scope="session")
def small_train_config() -> TrainConfig:
    """
    Training configuration with few rounds.

    Returns:
        TrainConfig with 12 rounds of depth-3 trees
    """
    return TrainConfig(rounds=12, max_depth=3, min_samples_leaf=3)


@pytest.fixture(scope="session")
def small_model(small_corpus, small_train_config) -> ComplexityModel:
    """
    Complexity model trained and fitted on the small synthetic corpus.

    Returns:
        Fitted ComplexityModel
    """
    classes, y = encode_labels([t.sic for t in small_corpus])
    vocab = fit_vocabulary(small_corpus)
    expert = train(
        transform_corpus(vocab, small_corpus), y, small_train_config, n_classes=len(classes)
    )
    return fit_scorer(expert, vocab, small_corpus, classes=classes)


@pytest.fixture
def corpus_file(temp_dir, support_transcript) -> Path:
    """
    JSONL corpus file with two valid records.

    Returns:
        Path to the corpus file
    """
    path = temp_dir / "corpus.jsonl"
    path.write_text(
        '{"id":"t1","utterances":[{"speaker":"agent","text":"Hi"}]}\n'
        '{"id":"t2","utterances":[{"speaker":"customer","text":"Hello there"}],'
        '"sic":"7","resolved":false}\n',
        encoding="utf-8",
    )
    return path


@pytest.fixture
def sample_yaml_config(temp_dir) -> Path:
    """
    YAML configuration file touching several sections.

    Returns:
        Path to the YAML file
    """
    data = {
        "text": {"max_features": 500},
        "train": {"rounds": 20, "learning_rate": 0.2, "seed": 3},
        "complexity": {"w": 1.5},
        "routing": {
            "low_threshold": 0.1,
            "high_threshold": 0.9,
            "queue_map": {"1": "billing"},
            "default_queue": "triage",
        },
        "synth": {"n_transcripts": 100, "n_classes": 5},
    }
    path = temp_dir / "config.yaml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


@pytest.fixture
def mock_env_vars(monkeypatch):
    """
    Set a full set of CC_* environment variables.

    Args:
        monkeypatch: Pytest's monkeypatch fixture
    """
    env = {
        "CC_MAX_FEATURES": "1000",
        "CC_SEED": "11",
        "CC_ROUNDS": "30",
        "CC_LEARNING_RATE": "0.05",
        "CC_WEIGHT": "3.0",
        "CC_LOW_THRESHOLD": "0.2",
        "CC_HIGH_THRESHOLD": "0.8",
        "CC_DEFAULT_QUEUE": "fallback",
        "CC_LOG_LEVEL": "DEBUG",
    }
    for key, value in env.items():
        monkeypatch.setenv(key, value)
    return env


@pytest.fixture(autouse=True)
def reset_environment(monkeypatch):
    """
    Reset environment for each test.

    Ensures tests don't interfere with each other through CC_* variables or
    the process-wide configuration.

    Args:
        monkeypatch: Pytest's monkeypatch fixture
    """
    for key in (
        "CC_MAX_FEATURES",
        "CC_SEED",
        "CC_ROUNDS",
        "CC_LEARNING_RATE",
        "CC_WEIGHT",
        "CC_LOW_THRESHOLD",
        "CC_HIGH_THRESHOLD",
        "CC_DEFAULT_QUEUE",
        "CC_LOG_LEVEL",
        "CC_LOG_FILE",
    ):
        monkeypatch.delenv(key, raising=False)
    set_config(None)
    yield
    set_config(None)
