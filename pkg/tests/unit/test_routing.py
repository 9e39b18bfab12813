"""
Unit tests for two-stage routing.
"""

import logging

import pandas as pd
import pytest
from pydantic import ValidationError

from contact_complexity.errors import ConfigError
from contact_complexity.routing import (
    ContactRouter,
    load_queue_map,
    resolve_queue_map,
    route,
    route_batch,
    write_routing_csv,
)
from contact_complexity.types import DecisionKind, RoutingDecision, RoutingReport, ScoreRecord
from contact_complexity.utils.config import RoutingConfig


def record(Q: float, sic: str = "1", id: str = "c") -> ScoreRecord:
    return ScoreRecord(
        id=id, L=1, E=0.1, S=0.1, Ln=0.0, En=0.0, Sn=0.0, C=0.0, Q=Q, predicted_sic=sic
    )


class TestDecide:
    """Test the per-contact decision rule."""

    @pytest.mark.unit
    def test_extremes_go_to_tiers(self):
        """Test junior and senior routing."""
        router = ContactRouter(RoutingConfig(queue_map={"1": "billing"}))
        assert router.decide(record(0.01)) == RoutingDecision.junior()
        assert router.decide(record(0.99)) == RoutingDecision.senior()

    @pytest.mark.unit
    @pytest.mark.edge
    def test_thresholds_are_product_based(self):
        """Test that Q equal to a threshold falls through to product routing."""
        router = ContactRouter(RoutingConfig(queue_map={"1": "billing"}))
        for q in (0.05, 0.5, 0.95):
            decision = router.decide(record(q))
            assert decision.kind is DecisionKind.PRODUCT_BASED
            assert decision.queue == "billing"
        assert router.decide(record(0.0499)).kind is DecisionKind.JUNIOR
        assert router.decide(record(0.9501)).kind is DecisionKind.SENIOR

    @pytest.mark.unit
    def test_custom_thresholds(self):
        """Test configurable thresholds."""
        router = ContactRouter(RoutingConfig(low_threshold=0.3, high_threshold=0.6))
        assert router.decide(record(0.2)).kind is DecisionKind.JUNIOR
        assert router.decide(record(0.7)).kind is DecisionKind.SENIOR

    @pytest.mark.unit
    def test_unmapped_sic_uses_default_queue(self, caplog):
        """Test the default queue and a single warning per SIC."""
        router = ContactRouter(RoutingConfig(default_queue="triage"))
        with caplog.at_level(logging.WARNING, logger="contact_complexity.routing"):
            for _ in range(3):
                assert router.decide(record(0.5, sic="77")).queue == "triage"
            router.decide(record(0.5, sic=None))
        warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
        assert len(warnings) == 2


class TestQueueMap:
    """Test queue map loading."""

    @pytest.mark.unit
    def test_load_csv(self, temp_dir):
        """Test reading SIC codes as strings."""
        path = temp_dir / "queues.csv"
        path.write_text("sic,queue\n007,billing\n12,hardware\n", encoding="utf-8")
        assert load_queue_map(path) == {"007": "billing", "12": "hardware"}

    @pytest.mark.unit
    @pytest.mark.edge
    def test_missing_column(self, temp_dir):
        """Test header validation."""
        path = temp_dir / "queues.csv"
        path.write_text("code,queue\n1,billing\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="sic"):
            load_queue_map(path)

    @pytest.mark.unit
    @pytest.mark.edge
    def test_empty_value(self, temp_dir):
        """Test that empty queue names are rejected."""
        path = temp_dir / "queues.csv"
        path.write_text("sic,queue\n1,\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="empty"):
            load_queue_map(path)

    @pytest.mark.unit
    def test_inline_map_overrides_file(self, temp_dir):
        """Test that inline entries win over file entries."""
        path = temp_dir / "queues.csv"
        path.write_text("sic,queue\n1,billing\n2,hardware\n", encoding="utf-8")
        cfg = RoutingConfig(queue_map_file=path, queue_map={"2": "devices"})
        assert resolve_queue_map(cfg) == {"1": "billing", "2": "devices"}


class TestRouteBatch:
    """Test routing whole corpora."""

    @pytest.mark.unit
    def test_counts_and_fractions(self, small_model, small_corpus):
        """Test that about 5% of the fit corpus goes to each tier."""
        report = route_batch(small_model, RoutingConfig(), small_corpus)

        assert report.total == len(small_corpus)
        assert len(report.decisions) == len(report.records) == len(small_corpus)
        assert report.fraction(DecisionKind.JUNIOR) == pytest.approx(0.05, abs=0.02)
        assert report.fraction(DecisionKind.SENIOR) == pytest.approx(0.05, abs=0.02)
        assert [r.id for r in report.records] == [t.id for t in small_corpus]

    @pytest.mark.unit
    def test_product_queue_follows_predicted_sic(self, small_model, small_corpus):
        """Test that product-based decisions use the expert's top SIC."""
        queue_map = {sic: f"queue-{sic}" for sic in small_model.classes}
        report = route_batch(small_model, RoutingConfig(queue_map=queue_map), small_corpus[:40])
        for r, d in zip(report.records, report.decisions):
            if d.kind is DecisionKind.PRODUCT_BASED:
                assert d.queue == f"queue-{r.predicted_sic}"

    @pytest.mark.unit
    def test_single_matches_batch(self, small_model, small_corpus):
        """Test route() against route_batch()."""
        cfg = RoutingConfig()
        report = route_batch(small_model, cfg, small_corpus[:3])
        for t, decision in zip(small_corpus[:3], report.decisions):
            _, single = route(small_model, cfg, t)
            assert single == decision

    @pytest.mark.unit
    @pytest.mark.edge
    def test_empty_batch(self, small_model):
        """Test routing nothing."""
        report = route_batch(small_model, RoutingConfig(), [])
        assert report.total == 0
        assert report.fraction(DecisionKind.SENIOR) == 0.0

    @pytest.mark.unit
    def test_write_csv(self, temp_dir):
        """Test the routing table layout."""
        router = ContactRouter(RoutingConfig(queue_map={"1": "billing"}))
        report = router.route_records([record(0.01, id="a"), record(0.5, id="b")])
        path = temp_dir / "routing.csv"
        write_routing_csv(report, path)

        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        assert list(frame.columns) == ["id", "Q", "decision", "queue"]
        assert frame.to_dict(orient="records") == [
            {"id": "a", "Q": "0.010000", "decision": "junior", "queue": ""},
            {"id": "b", "Q": "0.500000", "decision": "product_based", "queue": "billing"},
        ]


class TestRoutingDecision:
    """Test decision invariants."""

    @pytest.mark.unit
    @pytest.mark.edge
    def test_queue_rules(self):
        """Test that only product-based decisions carry a queue."""
        with pytest.raises(ValidationError):
            RoutingDecision(kind=DecisionKind.PRODUCT_BASED)
        with pytest.raises(ValidationError):
            RoutingDecision(kind=DecisionKind.JUNIOR, queue="billing")

    @pytest.mark.unit
    def test_report_defaults(self):
        """Test an empty report."""
        report = RoutingReport()
        assert report.total == 0
        assert set(report.counts) == set(DecisionKind)
