"""
Synthetic transcript corpora with controllable complexity.

Every contact belongs to one SIC class. Easy contacts are short and draw
their topical words from their own class vocabulary; hard contacts are long
and mix in words from a few confusable classes, which makes the expert
uncertain about them. Medium contacts sit in between. The difficulty tag is
encoded in the id prefix only, never in the text.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .textfeat import Vocabulary, tokenize
from .transcript import agent_sentence_length
from .types import ComplexityLabel, CorpusStats, Speaker, Transcript, Utterance
from .utils.config import SynthConfig

logger = logging.getLogger(__name__)

GREETING = "hello and welcome to customer support how can we help you today"

DIFFICULTY_LABELS = {
    "easy": ComplexityLabel.LOW,
    "medium": ComplexityLabel.NORMAL,
    "hard": ComplexityLabel.HIGH,
}

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


def _make_words(rng: np.random.Generator, count: int, taken: set) -> List[str]:
    """``count`` fresh pronounceable three-syllable words."""
    words: List[str] = []
    while len(words) < count:
        cons = rng.integers(0, len(_CONSONANTS), size=3)
        vows = rng.integers(0, len(_VOWELS), size=3)
        word = "".join(_CONSONANTS[c] + _VOWELS[v] for c, v in zip(cons, vows))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


class CorpusGenerator:
    """Draws a corpus from one seeded random stream."""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        taken = set(tokenize(GREETING))
        self.shared = _make_words(self.rng, cfg.shared_vocabulary_size, taken)
        self.classes = [
            _make_words(self.rng, cfg.class_vocabulary_size, taken) for _ in range(cfg.n_classes)
        ]

    def _layout(self) -> Tuple[np.ndarray, List[str]]:
        cfg = self.cfg
        n = cfg.n_transcripts
        n_easy = int(round(n * cfg.easy_fraction))
        n_medium = min(int(round(n * cfg.medium_fraction)), n - n_easy)
        difficulties = ["easy"] * n_easy + ["medium"] * n_medium
        difficulties += ["hard"] * (n - len(difficulties))
        labels = self.rng.permutation(np.arange(n) % cfg.n_classes)
        order = self.rng.permutation(n)
        return labels, [difficulties[i] for i in order]

    def _turns(self, difficulty: str) -> int:
        cfg = self.cfg
        low, high = {
            "easy": cfg.easy_agent_turns,
            "hard": cfg.hard_agent_turns,
            "medium": (cfg.easy_agent_turns[1], cfg.hard_agent_turns[0]),
        }[difficulty]
        return int(self.rng.integers(low, high + 1))

    def _utterance_text(self, label: int, others: np.ndarray, mixing: float) -> str:
        cfg = self.cfg
        n_words = int(self.rng.integers(cfg.words_per_turn[0], cfg.words_per_turn[1] + 1))
        topical = self.rng.random(n_words) < cfg.class_token_rate
        sources = np.full(n_words, label)
        if others.size:
            mixed = self.rng.random(n_words) < mixing
            sources = np.where(mixed, others[self.rng.integers(0, others.size, n_words)], sources)
        picks = self.rng.random(n_words)

        words = []
        for is_topical, source, pick in zip(topical, sources, picks):
            vocab = self.classes[int(source)] if is_topical else self.shared
            words.append(vocab[int(pick * len(vocab))])
        return " ".join(words)

    def _outcome(self, difficulty: str) -> Tuple[bool, bool]:
        cfg = self.cfg
        resolved, transferred = {
            "easy": (cfg.easy_resolved, cfg.easy_transferred),
            "hard": (cfg.hard_resolved, cfg.hard_transferred),
            "medium": (
                (cfg.easy_resolved + cfg.hard_resolved) / 2,
                (cfg.easy_transferred + cfg.hard_transferred) / 2,
            ),
        }[difficulty]
        return bool(self.rng.random() < resolved), bool(self.rng.random() < transferred)

    def generate(self) -> List[Transcript]:
        cfg = self.cfg
        labels, difficulties = self._layout()
        counters: Dict[str, int] = {"easy": 0, "medium": 0, "hard": 0}
        corpus = []
        for label, difficulty in zip(labels, difficulties):
            label = int(label)
            counters[difficulty] += 1
            if difficulty == "easy":
                others, mixing = np.empty(0, dtype=np.int64), 0.0
            else:
                candidates = np.array([k for k in range(cfg.n_classes) if k != label])
                others = self.rng.choice(candidates, size=cfg.confusable_classes, replace=False)
                mixing = cfg.mixing_rate if difficulty == "hard" else cfg.mixing_rate / 2

            utterances = [Utterance(speaker=Speaker.BOT, text=GREETING)]
            for _ in range(self._turns(difficulty)):
                utterances.append(
                    Utterance(
                        speaker=Speaker.CUSTOMER,
                        text=self._utterance_text(label, others, mixing),
                    )
                )
                utterances.append(
                    Utterance(
                        speaker=Speaker.AGENT,
                        text=self._utterance_text(label, others, mixing),
                    )
                )
            resolved, transferred = self._outcome(difficulty)
            corpus.append(
                Transcript(
                    id=f"{difficulty}-{counters[difficulty]:05d}",
                    utterances=tuple(utterances),
                    sic=str(label),
                    resolved=resolved,
                    transferred=transferred,
                )
            )
        return corpus


def generate_corpus(cfg: Optional[SynthConfig] = None) -> List[Transcript]:
    """
    Generate a synthetic corpus.

    Deterministic given the configuration: the same seed yields the same
    corpus. Classes are balanced exactly up to n mod K.

    Args:
        cfg: Generator configuration; defaults apply when omitted

    Returns:
        Transcripts with SIC labels, outcome flags and difficulty-tagged ids
    """
    cfg = cfg or SynthConfig()
    corpus = CorpusGenerator(cfg).generate()
    logger.info(
        "Generated %d transcripts over %d classes (seed %d)",
        len(corpus),
        cfg.n_classes,
        cfg.seed,
    )
    return corpus


def corpus_stats(
    corpus: Sequence[Transcript], vocabulary: Optional[Vocabulary] = None
) -> CorpusStats:
    """Class balance, mean agent turns per difficulty, token count and OOV rate."""
    class_counts: Dict[str, int] = {}
    difficulty_counts: Dict[str, int] = {}
    turns: Dict[str, List[int]] = {}
    n_tokens = 0
    n_oov = 0
    for t in corpus:
        if t.sic is not None:
            class_counts[t.sic] = class_counts.get(t.sic, 0) + 1
        if t.difficulty is not None:
            difficulty_counts[t.difficulty] = difficulty_counts.get(t.difficulty, 0) + 1
            turns.setdefault(t.difficulty, []).append(agent_sentence_length(t))
        tokens = tokenize(t.document_text)
        n_tokens += len(tokens)
        if vocabulary is not None:
            n_oov += sum(1 for tok in tokens if tok not in vocabulary)

    oov_rate = None
    if vocabulary is not None and n_tokens:
        oov_rate = n_oov / n_tokens
    return CorpusStats(
        n_transcripts=len(corpus),
        class_counts=dict(sorted(class_counts.items())),
        difficulty_counts=difficulty_counts,
        mean_agent_turns={d: float(np.mean(v)) for d, v in turns.items()},
        n_tokens=n_tokens,
        oov_rate=oov_rate,
    )


def write_labels(corpus: Sequence[Transcript], path: Union[str, Path]) -> int:
    """
    Write an ``id,label`` CSV for every difficulty-tagged transcript.

    Returns:
        Number of labels written
    """
    rows = [
        (t.id, DIFFICULTY_LABELS[t.difficulty].value)
        for t in corpus
        if t.difficulty is not None
    ]
    pd.DataFrame(rows, columns=["id", "label"]).to_csv(path, index=False, lineterminator="\n")
    logger.info("Wrote %d labels to %s", len(rows), path)
    return len(rows)
