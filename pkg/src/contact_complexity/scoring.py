"""
Absolute and relative complexity scores.

The three raw hypotheses are mapped to standard-normal scores by quantile
maps fitted on a corpus, combined as

    C = w * Ln + En + Sn

and C is mapped to the relative score Q in [0, 1] by a further quantile map
to the uniform target. Q = q means the contact's C exceeds a fraction q of
the fit corpus.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import FitError
from .gbdt import Ensemble
from .introspect import HypothesisTable, compute_hypotheses_batch
from .quantiles import QuantileMap, fit_quantile_map
from .textfeat import Vocabulary
from .types import ScoreRecord, SkewnessPoint, Transcript
from .utils.config import ComplexityConfig, QuantileConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ComplexityModel:
    """Expert, vocabulary and the four quantile maps of a fitted scorer."""

    expert: Ensemble
    vocabulary: Vocabulary
    qmap_L: QuantileMap
    qmap_E: QuantileMap
    qmap_S: QuantileMap
    qmap_C: QuantileMap
    config: ComplexityConfig
    classes: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.classes and len(self.classes) != self.expert.n_classes:
            raise ValueError(
                f"{len(self.classes)} class names for a {self.expert.n_classes}-class expert"
            )

    def class_name(self, index: int) -> str:
        """SIC code of a class index."""
        return self.classes[index] if self.classes else str(index)

    def normalize(self, table: HypothesisTable) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Normal scores (Ln, En, Sn) of a hypothesis table."""
        return (
            self.qmap_L.normal(table.L.astype(np.float64)),
            self.qmap_E.normal(table.E),
            self.qmap_S.normal(table.S),
        )


def combine(Ln: np.ndarray, En: np.ndarray, Sn: np.ndarray, w: float) -> np.ndarray:
    """Absolute complexity score."""
    return w * Ln + En + Sn


def fit_scorer(
    expert: Ensemble,
    vocab: Vocabulary,
    corpus: Sequence[Transcript],
    cfg: Optional[ComplexityConfig] = None,
    classes: Sequence[str] = (),
    quantile_cfg: Optional[QuantileConfig] = None,
    hypotheses: Optional[HypothesisTable] = None,
) -> ComplexityModel:
    """
    Fit the quantile maps of a complexity scorer on a corpus.

    Args:
        expert: Trained expert ensemble
        vocab: Vocabulary the expert was trained with
        corpus: Fit corpus, at least 2 transcripts
        cfg: Combiner configuration
        classes: SIC code per class index of the expert
        quantile_cfg: Reference cap and clip epsilon of the quantile maps
        hypotheses: Precomputed hypotheses of ``corpus``, in corpus order

    Returns:
        Fitted ComplexityModel

    Raises:
        FitError: If the corpus has fewer than 2 transcripts
    """
    cfg = cfg or ComplexityConfig()
    quantile_cfg = quantile_cfg or QuantileConfig()
    if len(corpus) < 2:
        raise FitError(f"fitting a scorer needs at least 2 transcripts, got {len(corpus)}")
    table = hypotheses
    if table is None:
        table = compute_hypotheses_batch(expert, vocab, corpus)
    if len(table) != len(corpus):
        raise FitError("hypothesis table does not match the corpus")

    def fit(values: np.ndarray) -> QuantileMap:
        return fit_quantile_map(values, quantile_cfg.max_references, quantile_cfg.epsilon)

    qmap_L = fit(table.L.astype(np.float64))
    qmap_E = fit(table.E)
    qmap_S = fit(table.S)
    C = combine(qmap_L.normal(table.L), qmap_E.normal(table.E), qmap_S.normal(table.S), cfg.w)
    model = ComplexityModel(
        expert=expert,
        vocabulary=vocab,
        qmap_L=qmap_L,
        qmap_E=qmap_E,
        qmap_S=qmap_S,
        qmap_C=fit(C),
        config=cfg,
        classes=tuple(classes),
    )
    logger.info("Fitted complexity scorer on %d transcripts (w=%g)", len(corpus), cfg.w)
    return model


def score_table(model: ComplexityModel, table: HypothesisTable) -> List[ScoreRecord]:
    """Score records for precomputed hypotheses."""
    if not len(table):
        return []
    Ln, En, Sn = model.normalize(table)
    C = combine(Ln, En, Sn, model.config.w)
    Q = model.qmap_C.uniform(C)
    predicted = np.argmax(table.proba, axis=1)
    return [
        ScoreRecord(
            id=table.ids[i],
            L=int(table.L[i]),
            E=float(table.E[i]),
            S=float(table.S[i]),
            Ln=float(Ln[i]),
            En=float(En[i]),
            Sn=float(Sn[i]),
            C=float(C[i]),
            Q=float(Q[i]),
            predicted_sic=model.class_name(int(predicted[i])),
        )
        for i in range(len(table))
    ]


def batch_score(model: ComplexityModel, corpus: Sequence[Transcript]) -> List[ScoreRecord]:
    """Score every transcript, preserving corpus order."""
    if not corpus:
        return []
    records = score_table(model, compute_hypotheses_batch(model.expert, model.vocabulary, corpus))
    logger.info("Scored %d transcripts", len(records))
    return records


def score(model: ComplexityModel, t: Transcript) -> ScoreRecord:
    """Full score record of one transcript."""
    return score_table(model, compute_hypotheses_batch(model.expert, model.vocabulary, [t]))[0]


def sample_skewness(values: Sequence[float]) -> Optional[float]:
    """Adjusted Fisher-Pearson skewness; None for fewer than 3 values or zero variance."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 3 or np.ptp(values) == 0.0:
        return None
    return float(stats.skew(values, bias=False))


def skewness_report(
    expert: Ensemble,
    vocab: Vocabulary,
    corpus: Sequence[Transcript],
    weights: Sequence[float],
    quantile_cfg: Optional[QuantileConfig] = None,
    hypotheses: Optional[HypothesisTable] = None,
) -> List[SkewnessPoint]:
    """
    Skewness of the C column for each length weight w.

    Raises:
        FitError: If the corpus has fewer than 3 transcripts
    """
    if len(corpus) < 3:
        raise FitError(f"a skewness report needs at least 3 transcripts, got {len(corpus)}")
    quantile_cfg = quantile_cfg or QuantileConfig()
    table = hypotheses
    if table is None:
        table = compute_hypotheses_batch(expert, vocab, corpus)

    normals = [
        fit_quantile_map(col, quantile_cfg.max_references, quantile_cfg.epsilon).normal(col)
        for col in (table.L.astype(np.float64), table.E, table.S)
    ]
    report = []
    for w in weights:
        skewness = sample_skewness(combine(*normals, w))
        if skewness is None:
            logger.warning("C column has zero variance at w=%g; skewness undefined", w)
        report.append(SkewnessPoint(w=w, skewness=skewness))
    return report
