"""
contact-complexity - contact-complexity scoring for customer-service chat transcripts.

An AI expert (TF-IDF features and multiclass gradient-boosted trees) is
trained to predict a contact's issue code. Three hypotheses are read out of
it per contact (length, uncertainty, skillfulness), normalized by quantile
transformation and combined into an absolute score C and a relative score Q
used for routing.
"""

from .gbdt import Ensemble, predict_proba, staged_proba, top_k_accuracy, train
from .introspect import (
    BoostingTrace,
    boosting_trace,
    compute_hypotheses,
    entropy,
    kl_divergence,
    skillfulness,
)
from .modelfile import load_model, save_model
from .quantiles import QuantileMap, fit_quantile_map, inv_normal_cdf, to_normal, to_uniform
from .routing import route, route_batch
from .scoring import ComplexityModel, batch_score, fit_scorer, score, skewness_report
from .synth import corpus_stats, generate_corpus
from .textfeat import SparseVector, Vocabulary, fit_vocabulary, tokenize, transform
from .transcript import agent_sentence_length, parse_corpus
from .types import (
    HypothesisVector,
    RoutingDecision,
    ScoreRecord,
    Speaker,
    Transcript,
    Utterance,
)

__version__ = "0.1.0"
__all__ = [
    "__version__",
    "BoostingTrace",
    "ComplexityModel",
    "Ensemble",
    "HypothesisVector",
    "QuantileMap",
    "RoutingDecision",
    "ScoreRecord",
    "SparseVector",
    "Speaker",
    "Transcript",
    "Utterance",
    "Vocabulary",
    "agent_sentence_length",
    "batch_score",
    "boosting_trace",
    "compute_hypotheses",
    "corpus_stats",
    "entropy",
    "fit_quantile_map",
    "fit_scorer",
    "fit_vocabulary",
    "generate_corpus",
    "inv_normal_cdf",
    "kl_divergence",
    "load_model",
    "parse_corpus",
    "predict_proba",
    "route",
    "route_batch",
    "save_model",
    "score",
    "skewness_report",
    "skillfulness",
    "staged_proba",
    "to_normal",
    "to_uniform",
    "tokenize",
    "train",
]
