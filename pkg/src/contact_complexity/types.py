"""
Type definitions and schemas for the contact-complexity pipeline.

This module contains the Pydantic models and enums shared across the
pipeline: transcripts, hypothesis vectors, score records, routing decisions
and evaluation results. Numeric fit state (vocabularies, ensembles, quantile
maps) lives next to the code that fits it.
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# ============================================================================
# Enums
# ============================================================================


class Speaker(str, Enum):
    """Role of the author of one utterance."""

    AGENT = "agent"
    CUSTOMER = "customer"
    BOT = "bot"


class DecisionKind(str, Enum):
    """Routing outcome classes."""

    JUNIOR = "junior"
    SENIOR = "senior"
    PRODUCT_BASED = "product_based"


class ComplexityLabel(str, Enum):
    """Ground-truth complexity labels used in evaluation."""

    LOW = "low"
    NORMAL = "normal"
    HIGH = "high"


class Band(str, Enum):
    """Complexity bands over the relative score Q."""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


# ============================================================================
# Transcripts
# ============================================================================


def _require_utf8(v: str, field: str) -> str:
    """Reject strings that cannot be written back as UTF-8 (lone surrogates)."""
    try:
        v.encode("utf-8")
    except UnicodeEncodeError as e:
        raise ValueError(f"{field} contains a lone surrogate at index {e.start}") from None
    return v


class Utterance(BaseModel):
    """One conversational turn."""

    model_config = ConfigDict(frozen=True)

    speaker: Speaker = Field(..., description="Author role of the turn")
    text: str = Field("", description="Turn text, may be empty")

    @field_validator("text")
    @classmethod
    def validate_text(cls, v: str) -> str:
        return _require_utf8(v, "text")


class Transcript(BaseModel):
    """A chat transcript plus its outcome metadata."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="Contact identifier, unique within a corpus")
    utterances: Tuple[Utterance, ...] = Field(
        default_factory=tuple, description="Turns in conversation order"
    )
    sic: Optional[str] = Field(None, description="Standardized issue code assigned by the agent")
    resolved: Optional[bool] = Field(None, description="Whether the issue was resolved")
    transferred: Optional[bool] = Field(None, description="Whether the contact was transferred")

    @field_validator("id", "sic")
    @classmethod
    def validate_encodable(cls, v: Optional[str], info) -> Optional[str]:
        return v if v is None else _require_utf8(v, info.field_name)

    @property
    def document_text(self) -> str:
        """All utterance texts joined by single spaces."""
        return " ".join(u.text for u in self.utterances)

    @property
    def difficulty(self) -> Optional[str]:
        """Difficulty tag encoded in synthetic ids (``easy-``, ``medium-``, ``hard-``)."""
        prefix, sep, _ = self.id.partition("-")
        if sep and prefix in ("easy", "medium", "hard"):
            return prefix
        return None


# ============================================================================
# Hypotheses and Scores
# ============================================================================


class HypothesisVector(BaseModel):
    """Raw complexity hypotheses of one contact."""

    model_config = ConfigDict(frozen=True)

    L: int = Field(..., ge=0, description="Number of agent utterances")
    E: float = Field(..., ge=0.0, description="Entropy of the expert's final distribution (nats)")
    S: float = Field(..., ge=0.0, description="Skillfulness: sum of the KL boosting function")

    @field_validator("E", "S")
    @classmethod
    def validate_finite(cls, v: float, info) -> float:
        """Reject NaN and infinities."""
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError(f"{info.field_name} must be finite")
        return v


class ScoreRecord(BaseModel):
    """Per-contact scoring output."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., description="Contact identifier")
    L: int = Field(..., ge=0, description="Raw length hypothesis")
    E: float = Field(..., description="Raw entropy hypothesis")
    S: float = Field(..., description="Raw skillfulness hypothesis")
    Ln: float = Field(..., description="Length after the normal quantile transform")
    En: float = Field(..., description="Entropy after the normal quantile transform")
    Sn: float = Field(..., description="Skillfulness after the normal quantile transform")
    C: float = Field(..., description="Absolute complexity score w*Ln + En + Sn")
    Q: float = Field(..., ge=0.0, le=1.0, description="Relative complexity score")
    predicted_sic: Optional[str] = Field(None, description="Expert's most likely SIC code")


class SkewnessPoint(BaseModel):
    """Sample skewness of the C column for one length weight."""

    w: float = Field(..., gt=0, description="Length weight")
    skewness: Optional[float] = Field(
        None, description="Adjusted Fisher-Pearson skewness, None when undefined"
    )


# ============================================================================
# Routing
# ============================================================================


class RoutingDecision(BaseModel):
    """Where one contact is sent."""

    model_config = ConfigDict(frozen=True)

    kind: DecisionKind = Field(..., description="Decision class")
    queue: Optional[str] = Field(None, description="Queue name for product-based routing")

    @model_validator(mode="after")
    def validate_queue(self) -> "RoutingDecision":
        """Product-based decisions carry a queue, direct routes never do."""
        if self.kind is DecisionKind.PRODUCT_BASED:
            if not self.queue:
                raise ValueError("product-based decision requires a non-empty queue")
        elif self.queue is not None:
            raise ValueError(f"{self.kind.value} decision takes no queue")
        return self

    @classmethod
    def junior(cls) -> "RoutingDecision":
        return cls(kind=DecisionKind.JUNIOR)

    @classmethod
    def senior(cls) -> "RoutingDecision":
        return cls(kind=DecisionKind.SENIOR)

    @classmethod
    def product_based(cls, queue: str) -> "RoutingDecision":
        return cls(kind=DecisionKind.PRODUCT_BASED, queue=queue)


class RoutingReport(BaseModel):
    """Batch routing result with per-decision counts."""

    records: List[ScoreRecord] = Field(default_factory=list, description="Score per contact")
    decisions: List[RoutingDecision] = Field(
        default_factory=list, description="Decision per contact, aligned with records"
    )
    counts: Dict[DecisionKind, int] = Field(
        default_factory=lambda: {kind: 0 for kind in DecisionKind},
        description="Number of contacts per decision class",
    )

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def fraction(self, kind: DecisionKind) -> float:
        """Share of contacts routed to ``kind`` (0.0 for an empty batch)."""
        return self.counts[kind] / self.total if self.total else 0.0


# ============================================================================
# Evaluation
# ============================================================================


class GroupMetrics(BaseModel):
    """Outcome rates for one extreme-complexity group."""

    name: str = Field(..., description="Group name")
    count: int = Field(..., ge=0, description="Contacts in the group")
    resolution_rate: Optional[float] = Field(
        None, ge=0.0, le=1.0, description="Resolved / contacts with a resolved flag"
    )
    transfer_rate: Optional[float] = Field(
        None, ge=0.0, le=1.0, description="Transferred / contacts with a transferred flag"
    )


class BinStats(BaseModel):
    """Label frequencies inside one Q interval."""

    index: int = Field(..., ge=0, description="Bin position, 0-based")
    lower: float = Field(..., description="Inclusive lower edge")
    upper: float = Field(..., description="Upper edge, inclusive only for the last bin")
    support: int = Field(..., ge=0, description="Labeled records in the bin")
    probabilities: Optional[Dict[ComplexityLabel, float]] = Field(
        None, description="Label frequencies, None for an empty bin"
    )


class BinCurve(BaseModel):
    """Binned label-probability curve over Q."""

    edges: List[float] = Field(..., description="Bin edges, length n_bins + 1")
    bins: List[BinStats] = Field(..., description="Per-bin statistics")

    @property
    def total_support(self) -> int:
        return sum(b.support for b in self.bins)


class BandSummary(BaseModel):
    """Mean raw hypotheses inside one complexity band."""

    band: Band = Field(..., description="Complexity band")
    count: int = Field(..., ge=0, description="Contacts in the band")
    mean_L: Optional[float] = Field(None, description="Mean agent utterance count")
    mean_E: Optional[float] = Field(None, description="Mean entropy")
    mean_S: Optional[float] = Field(None, description="Mean skillfulness")


class HypothesisHistograms(BaseModel):
    """Per-band histograms of score columns over edges shared by all bands."""

    edges: Dict[str, List[float]] = Field(..., description="Bin edges per column")
    counts: Dict[Band, Dict[str, List[int]]] = Field(
        ..., description="Counts per band, then per column"
    )

    def band_total(self, band: Band) -> int:
        """Number of records in ``band`` (every column's histogram sums to it)."""
        return sum(next(iter(self.counts[band].values()), []))


class CorpusStats(BaseModel):
    """Descriptive statistics of a corpus."""

    n_transcripts: int = Field(0, ge=0, description="Number of transcripts")
    class_counts: Dict[str, int] = Field(default_factory=dict, description="Transcripts per SIC")
    difficulty_counts: Dict[str, int] = Field(
        default_factory=dict, description="Transcripts per difficulty tag"
    )
    mean_agent_turns: Dict[str, float] = Field(
        default_factory=dict, description="Mean agent utterances per difficulty tag"
    )
    n_tokens: int = Field(0, ge=0, description="Total tokens over all utterances")
    oov_rate: Optional[float] = Field(
        None, ge=0.0, le=1.0, description="Share of tokens outside the vocabulary, if one is given"
    )
