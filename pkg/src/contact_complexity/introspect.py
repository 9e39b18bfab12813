"""
Complexity hypotheses read out of a trained expert.

- L: agent utterance count (see transcript.agent_sentence_length)
- E: entropy of the expert's full-model distribution P_M
- S: skillfulness, the sum over rounds of phi(i) = KL(P_i || P_M)

All logarithms are natural, so E and S are in nats.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import entr, rel_entr

from .errors import DivergenceUndefinedError, DomainError
from .gbdt import Ensemble, Matrix
from .textfeat import SparseVector, Vocabulary, transform_corpus
from .transcript import agent_sentence_length
from .types import HypothesisVector, Transcript

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-9

# rows per staged-prediction block; bounds the (M, rows, K) buffer
BATCH_ROWS = 2048


def _as_distribution(p: Sequence[float], name: str = "p") -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d distribution")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise DomainError(f"{name} has negative entries")
    if abs(arr.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise DomainError(f"{name} sums to {arr.sum():.12g}, not 1")
    return arr


def entropy(p: Sequence[float]) -> float:
    """
    Shannon entropy in nats, with 0 * log 0 = 0.

    Raises:
        DomainError: If p has negative entries or does not sum to 1 within 1e-9
    """
    return float(entr(_as_distribution(p)).sum())


def kl_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """
    KL(p || q) = sum_k p_k ln(p_k / q_k), with 0 * ln(0 / q) = 0.

    Raises:
        DomainError: On shape mismatch or invalid distributions
        DivergenceUndefinedError: If some p_k > 0 has q_k = 0
    """
    p = _as_distribution(p, "p")
    q = _as_distribution(q, "q")
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {p.size} vs {q.size}")
    if np.any((p > 0) & (q == 0)):
        raise DivergenceUndefinedError("q is zero where p is positive")
    return max(0.0, float(rel_entr(p, q).sum()))


@dataclass(frozen=True, eq=False)
class BoostingTrace:
    """Staged distributions P_1..P_M of one contact and the boosting function phi."""

    distributions: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        if self.distributions.ndim != 2 or self.phi.shape != (self.distributions.shape[0],):
            raise ValueError("trace needs an (M, K) distribution array and M phi values")
        if self.phi[-1] != 0.0 or np.any(self.phi < 0):
            raise ValueError("phi must be non-negative and end at exactly 0")

    @property
    def n_rounds(self) -> int:
        return int(self.phi.size)


def _phi(staged: np.ndarray) -> np.ndarray:
    """phi matrix (n, M) from staged distributions (M, n, K)."""
    final = staged[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = rel_entr(staged, final[None, :, :]).sum(axis=2).T
    phi = np.maximum(phi, 0.0)
    phi[:, -1] = 0.0
    return phi


def boosting_trace_batch(m: Ensemble, X: Matrix) -> np.ndarray:
    """phi for every row of X, shape (n, M)."""
    return _phi(m.staged_proba_batch(X))


def boosting_trace(m: Ensemble, x: SparseVector) -> BoostingTrace:
    """Staged distributions of x and phi(i) = KL(P_i || P_M); phi ends at exactly 0."""
    staged = m.staged_proba_batch([x])
    return BoostingTrace(distributions=staged[:, 0, :], phi=_phi(staged)[0])


def skillfulness(trace: BoostingTrace) -> float:
    """S: the sum of phi over all rounds."""
    return float(trace.phi.sum())


@dataclass(frozen=True, eq=False)
class HypothesisTable:
    """Column-wise hypotheses for a corpus, aligned with its order."""

    ids: tuple
    L: np.ndarray
    E: np.ndarray
    S: np.ndarray
    proba: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def row(self, i: int) -> HypothesisVector:
        return HypothesisVector(L=int(self.L[i]), E=float(self.E[i]), S=float(self.S[i]))


def compute_hypotheses_batch(
    m: Ensemble, v: Vocabulary, corpus: Sequence[Transcript]
) -> HypothesisTable:
    """L, E, S and the final distribution of every transcript in corpus order."""
    n = len(corpus)
    L = np.array([agent_sentence_length(t) for t in corpus], dtype=np.int64)
    E = np.zeros(n)
    S = np.zeros(n)
    proba = np.zeros((n, m.n_classes))
    X = transform_corpus(v, corpus) if n else None
    for start in range(0, n, BATCH_ROWS):
        stop = min(start + BATCH_ROWS, n)
        staged = m.staged_proba_batch(X[start:stop])
        proba[start:stop] = staged[-1]
        E[start:stop] = entr(staged[-1]).sum(axis=1)
        S[start:stop] = _phi(staged).sum(axis=1)
    if n:
        logger.debug("Computed hypotheses for %d transcripts", n)
    return HypothesisTable(ids=tuple(t.id for t in corpus), L=L, E=E, S=S, proba=proba)


def compute_hypotheses(m: Ensemble, v: Vocabulary, t: Transcript) -> HypothesisVector:
    """L, E and S of one transcript."""
    return compute_hypotheses_batch(m, v, [t]).row(0)
