"""
Command-line front end: gen -> train -> score -> route -> eval -> report.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error. Messages go to stderr; machine-readable summaries to stdout.
"""

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from . import __version__
from .errors import ConfigError, ContactComplexityError, CorpusError, UsageError
from .evaluation import (
    band_summary,
    binned_label_probabilities,
    group_metrics,
    hypothesis_histograms,
    read_labels,
    read_scores,
    write_band_summary,
    write_bin_curve,
    write_group_metrics,
    write_histograms,
    write_scores,
)
from .gbdt import encode_labels, top_k_accuracy, train
from .introspect import boosting_trace, compute_hypotheses_batch
from .modelfile import load_model, save_model
from .routing import ContactRouter, write_routing_csv
from .scoring import batch_score, fit_scorer, score_table, skewness_report
from .synth import corpus_stats, generate_corpus, write_labels
from .textfeat import fit_vocabulary, transform, transform_corpus
from .transcript import parse_corpus, write_corpus
from .types import DecisionKind
from .utils.config import Config, SynthConfig, set_config
from .utils.log import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises instead of exiting on bad arguments."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")


def _print_json(obj: Dict) -> None:
    print(json.dumps(obj, sort_keys=True))


# ============================================================================
# Commands
# ============================================================================


def cmd_gen(args: argparse.Namespace, config: Config) -> int:
    """Generate a synthetic corpus and its labels file."""
    synth = config.synth
    if args.n_transcripts is not None:
        try:
            synth = SynthConfig(**{**synth.model_dump(), "n_transcripts": args.n_transcripts})
        except ValidationError as e:
            raise ConfigError(f"invalid generator configuration: {e}") from e
    corpus = generate_corpus(synth)

    out = Path(args.out)
    labels = Path(args.labels) if args.labels else out.with_name(f"{out.stem}_labels.csv")
    write_corpus(corpus, out)
    write_labels(corpus, labels)
    stats = corpus_stats(corpus)
    _print_json(
        {
            "corpus": str(out),
            "labels": str(labels),
            "n_transcripts": stats.n_transcripts,
            "difficulty_counts": stats.difficulty_counts,
            "mean_agent_turns": stats.mean_agent_turns,
        }
    )
    return EXIT_OK


def _holdout_split(n: int, fraction: float, seed: int) -> tuple:
    order = np.random.default_rng(seed).permutation(n)
    n_holdout = min(int(round(n * fraction)), n - 2)
    n_holdout = max(n_holdout, 0)
    return np.sort(order[n_holdout:]), np.sort(order[:n_holdout])


def cmd_train(args: argparse.Namespace, config: Config) -> int:
    """Train vocabulary, expert and scorer; write the model file."""
    corpus = parse_corpus(args.corpus)
    missing = [t.id for t in corpus if t.sic is None]
    if missing:
        raise CorpusError(
            f"training needs a sic label on every transcript; {missing[0]!r} has none"
        )
    if len(corpus) < 2:
        raise CorpusError("training needs at least 2 transcripts")

    classes, y = encode_labels([t.sic for t in corpus])
    train_idx, holdout_idx = _holdout_split(
        len(corpus), config.train.holdout_fraction, config.train.seed
    )
    train_corpus = [corpus[i] for i in train_idx]
    vocab = fit_vocabulary(train_corpus, config.text.max_features)
    expert = train(
        transform_corpus(vocab, train_corpus), y[train_idx], config.train, n_classes=len(classes)
    )

    summary: Dict = {
        "n_transcripts": len(corpus),
        "n_train": int(train_idx.size),
        "n_holdout": int(holdout_idx.size),
        "n_classes": len(classes),
        "rounds": expert.n_rounds,
        "vocabulary_size": vocab.size,
        "train_loss": expert.train_loss[-1],
    }
    if holdout_idx.size:
        holdout = [corpus[i] for i in holdout_idx]
        X_holdout = transform_corpus(vocab, holdout)
        summary["holdout_top_k"] = {
            str(k): top_k_accuracy(expert, X_holdout, y[holdout_idx], k)
            for k in config.train.top_k
        }
        easy = np.array([t.difficulty == "easy" for t in holdout], dtype=bool)
        if easy.any():
            summary["holdout_easy_top_k"] = {
                str(k): top_k_accuracy(expert, X_holdout[easy], y[holdout_idx][easy], k)
                for k in config.train.top_k
            }

    model = fit_scorer(
        expert,
        vocab,
        corpus,
        config.complexity,
        classes=classes,
        quantile_cfg=config.quantiles,
    )
    summary["checksum"] = save_model(model, args.out)
    summary["model"] = str(args.out)
    _print_json(summary)
    return EXIT_OK


def cmd_score(args: argparse.Namespace, config: Config) -> int:
    """Score a corpus with a saved model."""
    model = load_model(args.model)
    records = batch_score(model, parse_corpus(args.corpus))
    write_scores(records, args.out)
    logger.info("Wrote %d score rows to %s", len(records), args.out)
    return EXIT_OK


def cmd_route(args: argparse.Namespace, config: Config) -> int:
    """Score and route a corpus."""
    routing = config.routing
    if args.queue_map:
        routing = routing.model_copy(update={"queue_map_file": Path(args.queue_map)})
    model = load_model(args.model)
    records = batch_score(model, parse_corpus(args.corpus))
    report = ContactRouter(routing).route_records(records)
    write_routing_csv(report, args.out)
    _print_json(
        {
            "total": report.total,
            "counts": {kind.value: report.counts[kind] for kind in DecisionKind},
            "fractions": {kind.value: report.fraction(kind) for kind in DecisionKind},
        }
    )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, config: Config) -> int:
    """Group metrics, label curves and band histograms for a scored corpus."""
    records = read_scores(args.scores)
    labels = read_labels(args.labels)
    corpus = parse_corpus(args.corpus)
    t_lo, t_hi = config.routing.low_threshold, config.routing.high_threshold

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    low, high = group_metrics(records, corpus, t_lo, t_hi)
    write_group_metrics([low, high], out / "group_metrics.csv")
    curve = binned_label_probabilities(records, labels, config.evaluation.n_bins)
    write_bin_curve(curve, out / "bin_curve.csv")
    write_histograms(
        hypothesis_histograms(records, t_lo, t_hi, config.evaluation.histogram_bins),
        out / "hypothesis_histograms.csv",
    )
    write_band_summary(band_summary(records, t_lo, t_hi), out / "band_summary.csv")
    _print_json(
        {
            "low": low.model_dump(mode="json"),
            "high": high.model_dump(mode="json"),
            "labeled": curve.total_support,
        }
    )
    return EXIT_OK


def _trace_filename(contact_id: str) -> str:
    return "trace_" + re.sub(r"[^A-Za-z0-9._-]", "_", contact_id) + ".csv"


def cmd_report(args: argparse.Namespace, config: Config) -> int:
    """Boosting traces, histograms and the skewness sweep of a corpus."""
    model = load_model(args.model)
    corpus = parse_corpus(args.corpus)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.ids:
        by_id = {t.id: t for t in corpus}
        unknown = [i for i in args.ids if i not in by_id]
        if unknown:
            raise CorpusError(f"unknown contact id {unknown[0]!r}")
        selected = [by_id[i] for i in args.ids]
    else:
        selected = corpus[: args.max_traces]
    for t in selected:
        trace = boosting_trace(model.expert, transform(model.vocabulary, t))
        frame = pd.DataFrame({"round": np.arange(1, trace.n_rounds + 1), "phi": trace.phi})
        _write_csv(frame, out / _trace_filename(t.id))

    table = compute_hypotheses_batch(model.expert, model.vocabulary, corpus)
    records = score_table(model, table)
    t_lo, t_hi = config.routing.low_threshold, config.routing.high_threshold
    bins = config.evaluation.histogram_bins
    for name, columns in (
        ("hypothesis_histograms.csv", ("L", "E", "S")),
        ("normalized_histograms.csv", ("Ln", "En", "Sn")),
        ("score_histograms.csv", ("C", "Q")),
    ):
        write_histograms(hypothesis_histograms(records, t_lo, t_hi, bins, columns), out / name)
    write_band_summary(band_summary(records, t_lo, t_hi), out / "band_summary.csv")

    skewness = []
    if len(corpus) >= 3:
        skewness = skewness_report(
            model.expert,
            model.vocabulary,
            corpus,
            config.complexity.skewness_weights,
            quantile_cfg=config.quantiles,
            hypotheses=table,
        )
    else:
        logger.warning("Skewness sweep skipped: needs at least 3 transcripts")
    _write_csv(
        pd.DataFrame([p.model_dump() for p in skewness], columns=["w", "skewness"]),
        out / "skewness.csv",
    )
    _print_json({"traces": len(selected), "records": len(records), "out": str(out)})
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--seed", type=int, help="Override the training and generator seeds")

    parser = ArgumentParser(
        prog="contact-complexity",
        description="Contact-complexity scoring for customer-service chat transcripts",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("gen", parents=[common], help="Generate a synthetic corpus")
    p.add_argument("--out", default="corpus.jsonl", help="Corpus JSONL to write")
    p.add_argument("--labels", help="Labels CSV to write (default: <out>_labels.csv)")
    p.add_argument("-n", "--n-transcripts", type=int, help="Override the corpus size")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("train", parents=[common], help="Train the expert and scorer")
    p.add_argument("corpus", help="Training corpus JSONL")
    p.add_argument("--out", default="model.json", help="Model file to write")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("score", parents=[common], help="Score a corpus")
    p.add_argument("model", help="Model file")
    p.add_argument("corpus", help="Corpus JSONL")
    p.add_argument("--out", default="scores.csv", help="Score CSV to write")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("route", parents=[common], help="Score and route a corpus")
    p.add_argument("model", help="Model file")
    p.add_argument("corpus", help="Corpus JSONL")
    p.add_argument("--queue-map", help="CSV with a sic,queue header")
    p.add_argument("--out", default="routing.csv", help="Routing CSV to write")
    p.set_defaults(handler=cmd_route)

    p = sub.add_parser("eval", parents=[common], help="Evaluate scores against outcomes and labels")
    p.add_argument("scores", help="Score CSV")
    p.add_argument("labels", help="Labels CSV (id,label)")
    p.add_argument("corpus", help="Corpus JSONL with outcome flags")
    p.add_argument("--out", default="eval", help="Output directory")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("report", parents=[common], help="Write traces, histograms and skewness")
    p.add_argument("model", help="Model file")
    p.add_argument("corpus", help="Corpus JSONL")
    p.add_argument("--out", default="report", help="Output directory")
    p.add_argument("--max-traces", type=int, default=10, help="Trace files to write")
    p.add_argument("--ids", nargs="+", help="Write traces for these contact ids instead")
    p.set_defaults(handler=cmd_report)

    return parser


def _load_config(args: argparse.Namespace) -> Config:
    config = Config.from_yaml(args.config) if args.config else Config()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "max_traces", 0) < 0:
            raise UsageError("--max-traces must be non-negative")
        config = _load_config(args)
    except (UsageError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, yaml.YAMLError, OSError, ValueError) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    set_config(config)
    setup_logging(config.logging)
    handler: Callable[[argparse.Namespace, Config], int] = args.handler
    try:
        return handler(args, config)
    except ContactComplexityError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (ValidationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        logger.exception("Internal error in %s", args.command)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
