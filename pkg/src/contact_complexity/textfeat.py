"""
Tokenization and TF-IDF embedding of transcripts.

Weights follow the smoothed-idf convention::

    idf(t) = ln((1 + N) / (1 + df(t))) + 1
    w(t)   = tf(t) * idf(t), then L2-normalized per document

with raw in-document counts as tf. A transcript's document is the text of
all its utterances.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer, TfidfTransformer

from .errors import FitError
from .types import Transcript

logger = logging.getLogger(__name__)

DEFAULT_MAX_FEATURES = 20000
MIN_TOKEN_LENGTH = 2

# runs of alphanumeric codepoints (word characters minus underscore)
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> List[str]:
    """Lowercase, split on non-alphanumeric codepoints, drop tokens shorter than 2."""
    return [tok for tok in _TOKEN_RE.findall(text.lower()) if len(tok) >= MIN_TOKEN_LENGTH]


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sparse feature vector with strictly increasing indices and no stored zeros."""

    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if indices.shape != weights.shape or indices.ndim != 1:
            raise ValueError("indices and weights must be 1-d arrays of equal length")
        if indices.size > 1 and np.any(np.diff(indices) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(weights == 0.0):
            raise ValueError("zero weights must not be stored")
        indices.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, float]]) -> "SparseVector":
        """Build from (index, weight) pairs in any order."""
        ordered = sorted(pairs)
        return cls(
            np.array([i for i, _ in ordered], dtype=np.int64),
            np.array([w for _, w in ordered], dtype=np.float64),
        )

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self) -> int:
        return hash((self.indices.tobytes(), self.weights.tobytes()))

    def get(self, index: int) -> float:
        """Weight at ``index``; absent features are 0.0."""
        pos = int(np.searchsorted(self.indices, index))
        if pos < self.indices.size and self.indices[pos] == index:
            return float(self.weights[pos])
        return 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.weights))

    def to_csr(self, n_features: int) -> sparse.csr_matrix:
        """One-row CSR matrix."""
        return sparse.csr_matrix(
            (self.weights, self.indices, np.array([0, self.indices.size])),
            shape=(1, n_features),
        )


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Fitted TF-IDF state: retained tokens, their document frequencies and N."""

    tokens: Tuple[str, ...]
    df: np.ndarray
    n_documents: int
    max_features: int = DEFAULT_MAX_FEATURES
    _index: Dict[str, int] = field(init=False, repr=False)
    _idf: np.ndarray = field(init=False, repr=False)
    _counter: Optional[CountVectorizer] = field(init=False, repr=False)
    _weighting: Optional[TfidfTransformer] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        df = np.asarray(self.df, dtype=np.int64)
        if df.shape != (len(self.tokens),):
            raise ValueError("df must have one entry per token")
        if len(self.tokens) > self.max_features:
            raise ValueError("vocabulary exceeds its feature cap")
        if np.any(df < 1) or np.any(df > self.n_documents):
            raise ValueError("document frequencies must lie in [1, N]")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("tokens must be unique")
        idf = np.log((1.0 + self.n_documents) / (1.0 + df)) + 1.0
        counter = weighting = None
        if index:
            counter = CountVectorizer(
                tokenizer=tokenize, lowercase=False, token_pattern=None, vocabulary=dict(index)
            )
            weighting = TfidfTransformer(norm="l2", use_idf=True, smooth_idf=True)
            weighting.idf_ = idf.copy()
            weighting.n_features_in_ = len(index)
        df.setflags(write=False)
        idf.setflags(write=False)
        object.__setattr__(self, "df", df)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_idf", idf)
        object.__setattr__(self, "_counter", counter)
        object.__setattr__(self, "_weighting", weighting)

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def idf(self) -> np.ndarray:
        return self._idf

    @property
    def counter(self) -> CountVectorizer:
        """Raw term counts over the retained tokens, in feature-index order."""
        if self._counter is None:
            raise FitError("an empty vocabulary has no features to count")
        return self._counter

    @property
    def weighting(self) -> TfidfTransformer:
        """tf * idf weighting with per-row L2 normalization."""
        if self._weighting is None:
            raise FitError("an empty vocabulary has no idf weights")
        return self._weighting

    def index_of(self, token: str) -> int:
        """Feature index of ``token``, or -1 when out of vocabulary."""
        return self._index.get(token, -1)

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def document_frequency(self, token: str) -> int:
        i = self.index_of(token)
        return int(self.df[i]) if i >= 0 else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tokens": list(self.tokens),
            "df": [int(d) for d in self.df],
            "n_documents": int(self.n_documents),
            "max_features": int(self.max_features),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Vocabulary":
        return cls(
            tokens=tuple(data["tokens"]),
            df=np.asarray(data["df"], dtype=np.int64),
            n_documents=int(data["n_documents"]),
            max_features=int(data["max_features"]),
        )


def fit_vocabulary(corpus: Sequence[Transcript], cap: int = DEFAULT_MAX_FEATURES) -> Vocabulary:
    """
    Fit the vocabulary on a corpus.

    Keeps the ``cap`` tokens with the highest document frequency, ties
    broken by lexicographic token order. Feature indices follow that ranking.

    Raises:
        FitError: On an empty corpus or cap < 1
    """
    if not corpus:
        raise FitError("cannot fit a vocabulary on an empty corpus")
    if cap < 1:
        raise FitError(f"feature cap must be >= 1, got {cap}")

    df: Counter = Counter()
    for t in corpus:
        df.update(set(tokenize(t.document_text)))

    ranked = sorted(df.items(), key=lambda item: (-item[1], item[0]))[:cap]
    vocab = Vocabulary(
        tokens=tuple(tok for tok, _ in ranked),
        df=np.array([count for _, count in ranked], dtype=np.int64),
        n_documents=len(corpus),
        max_features=cap,
    )
    logger.info(
        "Fitted vocabulary: %d of %d distinct tokens over %d documents",
        vocab.size,
        len(df),
        vocab.n_documents,
    )
    return vocab


def transform(v: Vocabulary, t: Transcript) -> SparseVector:
    """TF-IDF vector of one transcript; out-of-vocabulary tokens are ignored."""
    row = transform_corpus(v, [t])
    return SparseVector(row.indices, row.data)


def transform_corpus(v: Vocabulary, corpus: Sequence[Transcript]) -> sparse.csr_matrix:
    """(n, V) CSR matrix of TF-IDF rows, one per transcript, indices sorted."""
    if v.size == 0 or not corpus:
        return sparse.csr_matrix((len(corpus), v.size), dtype=np.float64)
    counts = v.counter.transform([t.document_text for t in corpus])
    X = sparse.csr_matrix(v.weighting.transform(counts), dtype=np.float64)
    X.eliminate_zeros()
    X.sort_indices()
    return X


def vectors_to_csr(vectors: Sequence[SparseVector], n_features: int) -> sparse.csr_matrix:
    """Stack sparse vectors row-wise, preserving their exact weights."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    if vectors:
        indptr[1:] = np.cumsum([len(x) for x in vectors])
        indices = np.concatenate([x.indices for x in vectors])
        data = np.concatenate([x.weights for x in vectors])
    else:
        indices = np.empty(0, dtype=np.int64)
        data = np.empty(0, dtype=np.float64)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), n_features))
