"""
Two-stage contact routing.

Contacts with an extreme relative score go straight to an agent tier:
Q < low_threshold to junior agents, Q > high_threshold to senior agents.
Everything in between, boundaries included, falls through to the
product-line router, which sends the contact to the queue of the expert's
most likely SIC code.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import pandas as pd

from .errors import ConfigError
from .scoring import ComplexityModel, batch_score
from .types import DecisionKind, RoutingDecision, RoutingReport, ScoreRecord, Transcript
from .utils.config import RoutingConfig

logger = logging.getLogger(__name__)

ROUTING_COLUMNS = ["id", "Q", "decision", "queue"]


def load_queue_map(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read a ``sic,queue`` CSV into a dict.

    Raises:
        ConfigError: If a column is missing or a row has an empty field
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = {"sic", "queue"} - set(frame.columns)
    if missing:
        raise ConfigError(f"{path}: queue map is missing column(s) {sorted(missing)}")
    if (frame["sic"] == "").any() or (frame["queue"] == "").any():
        raise ConfigError(f"{path}: queue map has empty sic or queue values")
    return dict(zip(frame["sic"], frame["queue"]))


def resolve_queue_map(cfg: RoutingConfig) -> Dict[str, str]:
    """Inline queue map merged over the queue map file, if any."""
    queue_map: Dict[str, str] = {}
    if cfg.queue_map_file is not None:
        queue_map.update(load_queue_map(cfg.queue_map_file))
    queue_map.update(cfg.queue_map)
    return queue_map


class ContactRouter:
    """Routes scored contacts; warns once per SIC code missing from the queue map."""

    def __init__(self, cfg: Optional[RoutingConfig] = None):
        self.cfg = cfg or RoutingConfig()
        self.queue_map = resolve_queue_map(self.cfg)
        self._warned: Set[str] = set()

    def queue_for(self, sic: Optional[str]) -> str:
        if sic is not None and sic in self.queue_map:
            return self.queue_map[sic]
        if sic not in self._warned:
            self._warned.add(sic)
            logger.warning(
                "No queue mapped for SIC %r; using default queue %r", sic, self.cfg.default_queue
            )
        return self.cfg.default_queue

    def decide(self, record: ScoreRecord) -> RoutingDecision:
        if record.Q < self.cfg.low_threshold:
            return RoutingDecision.junior()
        if record.Q > self.cfg.high_threshold:
            return RoutingDecision.senior()
        return RoutingDecision.product_based(self.queue_for(record.predicted_sic))

    def route_records(self, records: Iterable[ScoreRecord]) -> RoutingReport:
        report = RoutingReport()
        for record in records:
            decision = self.decide(record)
            report.records.append(record)
            report.decisions.append(decision)
            report.counts[decision.kind] += 1
        return report


def route(
    model: ComplexityModel, cfg: RoutingConfig, t: Transcript
) -> Tuple[ScoreRecord, RoutingDecision]:
    """Score one transcript and decide where it goes."""
    report = route_batch(model, cfg, [t])
    return report.records[0], report.decisions[0]


def route_batch(
    model: ComplexityModel, cfg: RoutingConfig, corpus: Sequence[Transcript]
) -> RoutingReport:
    """Route every transcript in corpus order, with per-decision counts."""
    report = ContactRouter(cfg).route_records(batch_score(model, corpus))
    if report.total:
        logger.info(
            "Routed %d contacts: %d junior, %d senior, %d product-based",
            report.total,
            report.counts[DecisionKind.JUNIOR],
            report.counts[DecisionKind.SENIOR],
            report.counts[DecisionKind.PRODUCT_BASED],
        )
    return report


def routing_frame(report: RoutingReport) -> pd.DataFrame:
    """Routing table with columns id, Q, decision, queue."""
    rows: List[dict] = [
        {
            "id": record.id,
            "Q": record.Q,
            "decision": decision.kind.value,
            "queue": decision.queue or "",
        }
        for record, decision in zip(report.records, report.decisions)
    ]
    return pd.DataFrame(rows, columns=ROUTING_COLUMNS)


def write_routing_csv(report: RoutingReport, path: Union[str, Path]) -> None:
    routing_frame(report).to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
