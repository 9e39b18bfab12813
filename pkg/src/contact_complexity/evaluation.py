"""
Validation procedures for complexity scores.

- group_metrics: resolution and transfer rates of the two extreme groups
- binned_label_probabilities: label frequencies over equal Q intervals
- hypothesis_histograms / band_summary: raw hypotheses per complexity band
"""

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import EvaluationError
from .types import (
    Band,
    BandSummary,
    BinCurve,
    BinStats,
    ComplexityLabel,
    GroupMetrics,
    HypothesisHistograms,
    ScoreRecord,
    Transcript,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_LOW_THRESHOLD = 0.05
DEFAULT_HIGH_THRESHOLD = 0.95
DEFAULT_BINS = 20
HYPOTHESES = ("L", "E", "S")

SCORE_COLUMNS = ["id", "L", "E", "S", "Ln", "En", "Sn", "C", "Q"]

# ============================================================================
# Bands and bins
# ============================================================================


def band_of(
    q: float, t_lo: float = DEFAULT_LOW_THRESHOLD, t_hi: float = DEFAULT_HIGH_THRESHOLD
) -> Band:
    """Complexity band of a relative score; both thresholds belong to the medium band."""
    if q < t_lo:
        return Band.LOW
    if q > t_hi:
        return Band.HIGH
    return Band.MEDIUM


def bin_edges(n_bins: int = DEFAULT_BINS) -> np.ndarray:
    return np.arange(n_bins + 1) / n_bins


def bin_index(q: Union[float, np.ndarray], n_bins: int = DEFAULT_BINS) -> np.ndarray:
    """Left-closed bins over [0, 1]; the last bin also holds Q = 1."""
    idx = np.searchsorted(bin_edges(n_bins), np.asarray(q, dtype=np.float64), side="right") - 1
    return np.clip(idx, 0, n_bins - 1)


# ============================================================================
# Group metrics
# ============================================================================


def _rate(flags: List[Optional[bool]], name: str, group: str) -> Optional[float]:
    present = [f for f in flags if f is not None]
    if not present:
        logger.warning(
            "%s rate of the %s group is undefined: no contact carries the flag", name, group
        )
        return None
    return sum(present) / len(present)


def _metrics(name: str, group: List[Transcript]) -> GroupMetrics:
    return GroupMetrics(
        name=name,
        count=len(group),
        resolution_rate=_rate([t.resolved for t in group], "resolution", name),
        transfer_rate=_rate([t.transferred for t in group], "transfer", name),
    )


def group_metrics(
    records: Sequence[ScoreRecord],
    corpus: Sequence[Transcript],
    t_lo: float = DEFAULT_LOW_THRESHOLD,
    t_hi: float = DEFAULT_HIGH_THRESHOLD,
) -> Tuple[GroupMetrics, GroupMetrics]:
    """
    Outcome rates of the low (Q < t_lo) and high (Q > t_hi) groups.

    A contact missing a flag is left out of that flag's denominator; a group
    with no flagged contact reports the rate as None.

    Raises:
        EvaluationError: If record ids and corpus ids differ
    """
    by_id = {t.id: t for t in corpus}
    record_ids = {r.id for r in records}
    if record_ids != set(by_id) or len(record_ids) != len(records):
        unknown = sorted(record_ids - set(by_id))[:3]
        raise EvaluationError(
            f"score records and corpus are not aligned by id (e.g. unknown ids {unknown})"
        )
    low = [by_id[r.id] for r in records if r.Q < t_lo]
    high = [by_id[r.id] for r in records if r.Q > t_hi]
    return _metrics("low", low), _metrics("high", high)


# ============================================================================
# Label curves
# ============================================================================


def _parse_label(value: Union[str, ComplexityLabel]) -> ComplexityLabel:
    try:
        return ComplexityLabel(value)
    except ValueError:
        allowed = ", ".join(label.value for label in ComplexityLabel)
        raise EvaluationError(f"unknown label {value!r} (expected one of {allowed})") from None


def binned_label_probabilities(
    records: Sequence[ScoreRecord],
    labels: Union[Mapping[str, Union[str, ComplexityLabel]], Sequence[Union[str, ComplexityLabel]]],
    n_bins: int = DEFAULT_BINS,
) -> BinCurve:
    """
    Label frequencies per Q interval.

    ``labels`` is either a mapping from record id to label or a sequence
    aligned with ``records``. Records without a label are skipped; empty bins
    carry no probabilities.

    Raises:
        EvaluationError: On an unknown label or a misaligned label sequence
    """
    if isinstance(labels, Mapping):
        pairs = [(r.Q, labels[r.id]) for r in records if r.id in labels]
    else:
        if len(labels) != len(records):
            raise EvaluationError(f"{len(labels)} labels for {len(records)} records")
        pairs = list(zip((r.Q for r in records), labels))

    parsed = [_parse_label(label) for _, label in pairs]
    idx = bin_index([q for q, _ in pairs], n_bins) if pairs else np.empty(0, dtype=np.int64)
    edges = bin_edges(n_bins)

    bins = []
    for b in range(n_bins):
        members = [parsed[i] for i in np.flatnonzero(idx == b)]
        probabilities = None
        if members:
            probabilities = {
                label: sum(1 for m in members if m is label) / len(members)
                for label in ComplexityLabel
            }
        bins.append(
            BinStats(
                index=b,
                lower=float(edges[b]),
                upper=float(edges[b + 1]),
                support=len(members),
                probabilities=probabilities,
            )
        )
    return BinCurve(edges=[float(e) for e in edges], bins=bins)


# ============================================================================
# Band histograms
# ============================================================================


def hypothesis_histograms(
    records: Sequence[ScoreRecord],
    t_lo: float = DEFAULT_LOW_THRESHOLD,
    t_hi: float = DEFAULT_HIGH_THRESHOLD,
    n_bins: int = DEFAULT_BINS,
    columns: Sequence[str] = HYPOTHESES,
) -> HypothesisHistograms:
    """
    Histograms of score columns (raw L, E, S by default) per complexity band.

    Edges are shared by all bands, so the three band histograms of a column
    add up to the histogram of the whole set.
    """
    bands = [band_of(r.Q, t_lo, t_hi) for r in records]
    masks = {band: np.array([b is band for b in bands], dtype=bool) for band in Band}
    edges: Dict[str, List[float]] = {}
    counts: Dict[Band, Dict[str, List[int]]] = {band: {} for band in Band}
    for column in columns:
        values = np.array([getattr(r, column) for r in records], dtype=np.float64)
        if values.size:
            col_edges = np.histogram_bin_edges(values, bins=n_bins)
        else:
            col_edges = bin_edges(n_bins)
        edges[column] = [float(e) for e in col_edges]
        for band in Band:
            hist, _ = np.histogram(values[masks[band]] if values.size else values, bins=col_edges)
            counts[band][column] = [int(c) for c in hist]
    return HypothesisHistograms(edges=edges, counts=counts)


def band_summary(
    records: Sequence[ScoreRecord],
    t_lo: float = DEFAULT_LOW_THRESHOLD,
    t_hi: float = DEFAULT_HIGH_THRESHOLD,
) -> List[BandSummary]:
    """Count and mean raw hypotheses per band, in low/medium/high order."""
    summaries = []
    for band in Band:
        members = [r for r in records if band_of(r.Q, t_lo, t_hi) is band]
        means = {
            h: (float(np.mean([getattr(r, h) for r in members])) if members else None)
            for h in HYPOTHESES
        }
        summaries.append(
            BandSummary(
                band=band,
                count=len(members),
                mean_L=means["L"],
                mean_E=means["E"],
                mean_S=means["S"],
            )
        )
    return summaries


# ============================================================================
# CSV input/output
# ============================================================================


def _write(frame: pd.DataFrame, path: PathLike) -> None:
    frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")


def scores_frame(records: Sequence[ScoreRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [[getattr(r, c) for c in SCORE_COLUMNS] for r in records], columns=SCORE_COLUMNS
    )


def write_scores(records: Sequence[ScoreRecord], path: PathLike) -> None:
    """Score CSV: ``id,L,E,S,Ln,En,Sn,C,Q``, one row per record in order."""
    _write(scores_frame(records), path)


def read_scores(path: PathLike) -> List[ScoreRecord]:
    """
    Read a score CSV written by write_scores.

    Raises:
        EvaluationError: If the file is empty or a column is missing
    """
    try:
        frame = pd.read_csv(path, dtype={"id": str}, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise EvaluationError(f"{path}: score file is empty") from None
    missing = [c for c in SCORE_COLUMNS if c not in frame.columns]
    if missing:
        raise EvaluationError(f"{path}: score file is missing column(s) {missing}")
    return [
        ScoreRecord(**{c: row[c] for c in SCORE_COLUMNS})
        for row in frame[SCORE_COLUMNS].to_dict(orient="records")
    ]


def read_labels(path: PathLike) -> Dict[str, ComplexityLabel]:
    """
    Read an ``id,label`` CSV.

    Raises:
        EvaluationError: On an empty file, missing columns, duplicate ids or
            unknown labels
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise EvaluationError(f"{path}: labels file is empty") from None
    if {"id", "label"} - set(frame.columns):
        raise EvaluationError(f"{path}: labels file needs an id,label header")
    if frame.empty:
        raise EvaluationError(f"{path}: labels file has no rows")
    duplicated = frame["id"][frame["id"].duplicated()]
    if not duplicated.empty:
        raise EvaluationError(f"{path}: duplicate id {duplicated.iloc[0]!r}")
    return {i: _parse_label(label) for i, label in zip(frame["id"], frame["label"])}


def write_group_metrics(groups: Sequence[GroupMetrics], path: PathLike) -> None:
    _write(
        pd.DataFrame(
            [[g.name, g.count, g.resolution_rate, g.transfer_rate] for g in groups],
            columns=["group", "count", "resolution_rate", "transfer_rate"],
        ),
        path,
    )


def write_bin_curve(curve: BinCurve, path: PathLike) -> None:
    """One row per bin; probability cells of empty bins are left blank."""
    rows = []
    for b in curve.bins:
        row = {"bin": b.index, "lower": b.lower, "upper": b.upper, "support": b.support}
        for label in ComplexityLabel:
            row[f"p_{label.value}"] = b.probabilities[label] if b.probabilities else None
        rows.append(row)
    _write(pd.DataFrame(rows), path)


def write_histograms(histograms: HypothesisHistograms, path: PathLike) -> None:
    """Long format: band, column, bin, lower, upper, count."""
    rows = []
    for band, per_column in histograms.counts.items():
        for column, counts in per_column.items():
            edges = histograms.edges[column]
            for i, count in enumerate(counts):
                rows.append(
                    {
                        "band": band.value,
                        "column": column,
                        "bin": i,
                        "lower": edges[i],
                        "upper": edges[i + 1],
                        "count": count,
                    }
                )
    _write(pd.DataFrame(rows, columns=["band", "column", "bin", "lower", "upper", "count"]), path)


def write_band_summary(summaries: Sequence[BandSummary], path: PathLike) -> None:
    _write(pd.DataFrame([s.model_dump(mode="json") for s in summaries]), path)
