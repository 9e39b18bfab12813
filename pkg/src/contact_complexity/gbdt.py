"""
Multiclass gradient-boosted decision trees with staged prediction.

Each boosting round fits one regression tree per class on the softmax
gradients g = p - y and hessians h = p (1 - p). Leaves hold the Newton step
-sum(g) / (sum(h) + lambda), already scaled by the learning rate. Margins start
at the log class prior and accumulate round by round, so the prediction after
any prefix of rounds is available ("staged" prediction).

Split search is exact greedy over the values present at a node. Features are
non-negative and sparse; an absent feature evaluates as 0.0 and a row goes
left iff its value is <= the threshold. Among equal gains the lowest feature
index wins, then the lowest threshold.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.special import softmax

from .errors import EvaluationError, TrainError
from .textfeat import SparseVector, vectors_to_csr
from .utils.config import TrainConfig

logger = logging.getLogger(__name__)

Matrix = Union[sparse.spmatrix, Sequence[SparseVector]]

# ============================================================================
# Trees
# ============================================================================


@dataclass(frozen=True)
class TreeNode:
    """One node of a regression tree; ``feature < 0`` marks a leaf."""

    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True, eq=False)
class Tree:
    """Regression tree stored as a pre-order node list; the root is node 0."""

    nodes: Tuple[TreeNode, ...]

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("a tree needs at least one node")
        for i, node in enumerate(self.nodes):
            if node.is_leaf:
                continue
            if not (i < node.left < len(self.nodes) and i < node.right < len(self.nodes)):
                raise ValueError(f"internal node {i} has invalid children")

    @classmethod
    def leaf(cls, value: float) -> "Tree":
        return cls((TreeNode(value=float(value)),))

    @classmethod
    def split(cls, feature: int, threshold: float, left: "Tree", right: "Tree") -> "Tree":
        """Join two subtrees under a new root."""
        left_nodes = _shift(left.nodes, 1)
        right_offset = 1 + len(left.nodes)
        right_nodes = _shift(right.nodes, right_offset)
        root = TreeNode(
            feature=int(feature), threshold=float(threshold), left=1, right=right_offset
        )
        return cls((root,) + left_nodes + right_nodes)

    @property
    def depth(self) -> int:
        def walk(i: int) -> int:
            node = self.nodes[i]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)

    @property
    def max_feature(self) -> int:
        return max((n.feature for n in self.nodes), default=-1)

    def predict_value(self, x: SparseVector) -> float:
        """Walk one sparse vector to its leaf."""
        node = self.nodes[0]
        while not node.is_leaf:
            node = self.nodes[node.left if x.get(node.feature) <= node.threshold else node.right]
        return node.value

    def apply(self, X: sparse.csc_matrix) -> np.ndarray:
        """Leaf value for every row of a CSC matrix."""
        out = np.empty(X.shape[0], dtype=np.float64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            i, rows = stack.pop()
            node = self.nodes[i]
            if node.is_leaf:
                out[rows] = node.value
                continue
            go_left = _column(X, node.feature)[rows] <= node.threshold
            stack.append((node.left, rows[go_left]))
            stack.append((node.right, rows[~go_left]))
        return out

    def to_dict(self) -> Dict[str, List[Any]]:
        return {
            "feature": [n.feature for n in self.nodes],
            "threshold": [n.threshold for n in self.nodes],
            "left": [n.left for n in self.nodes],
            "right": [n.right for n in self.nodes],
            "value": [n.value for n in self.nodes],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, List[Any]]) -> "Tree":
        return cls(
            tuple(
                TreeNode(int(f), float(t), int(lo), int(hi), float(v))
                for f, t, lo, hi, v in zip(
                    data["feature"], data["threshold"], data["left"], data["right"], data["value"]
                )
            )
        )


def _shift(nodes: Tuple[TreeNode, ...], offset: int) -> Tuple[TreeNode, ...]:
    return tuple(
        n
        if n.is_leaf
        else TreeNode(n.feature, n.threshold, n.left + offset, n.right + offset, n.value)
        for n in nodes
    )


def _column(X: sparse.csc_matrix, j: int) -> np.ndarray:
    """Dense copy of column ``j``; columns beyond the matrix are all zero."""
    col = np.zeros(X.shape[0], dtype=np.float64)
    if j < X.shape[1]:
        start, end = X.indptr[j], X.indptr[j + 1]
        col[X.indices[start:end]] = X.data[start:end]
    return col


# ============================================================================
# Ensemble
# ============================================================================


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Trained multiclass boosting model: an M x K grid of trees."""

    n_classes: int
    learning_rate: float
    base_score: np.ndarray
    trees: Tuple[Tuple[Tree, ...], ...]
    n_features: int = 0
    train_loss: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n_classes < 2:
            raise ValueError("an ensemble needs at least 2 classes")
        if not self.trees:
            raise ValueError("an ensemble needs at least 1 round")
        if any(len(round_trees) != self.n_classes for round_trees in self.trees):
            raise ValueError("every round must hold exactly one tree per class")
        base = np.asarray(self.base_score, dtype=np.float64).reshape(-1)
        if base.size == 1:
            base = np.full(self.n_classes, base[0])
        if base.shape != (self.n_classes,):
            raise ValueError("base_score must be a scalar or one value per class")
        base.setflags(write=False)
        object.__setattr__(self, "base_score", base)
        object.__setattr__(self, "trees", tuple(tuple(r) for r in self.trees))
        object.__setattr__(self, "train_loss", tuple(float(x) for x in self.train_loss))
        used = max(t.max_feature for r in self.trees for t in r) + 1
        object.__setattr__(self, "n_features", max(int(self.n_features), used))

    @property
    def n_rounds(self) -> int:
        return len(self.trees)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_classes": self.n_classes,
            "n_rounds": self.n_rounds,
            "n_features": self.n_features,
            "learning_rate": float(self.learning_rate),
            "base_score": [float(b) for b in self.base_score],
            "train_loss": list(self.train_loss),
            "trees": [[t.to_dict() for t in r] for r in self.trees],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Ensemble":
        trees = tuple(tuple(Tree.from_dict(t) for t in r) for r in data["trees"])
        if len(trees) != int(data["n_rounds"]):
            raise ValueError("round count does not match the stored trees")
        return cls(
            n_classes=int(data["n_classes"]),
            learning_rate=float(data["learning_rate"]),
            base_score=np.asarray(data["base_score"], dtype=np.float64),
            trees=trees,
            n_features=int(data["n_features"]),
            train_loss=tuple(data.get("train_loss", ())),
        )

    # ------------------------------------------------------------------------
    # Prediction
    # ------------------------------------------------------------------------

    def _as_csc(self, X: Matrix) -> sparse.csc_matrix:
        if isinstance(X, SparseVector):
            X = [X]
        if not sparse.issparse(X):
            vectors = list(X)
            width = max([self.n_features] + [int(x.indices[-1]) + 1 for x in vectors if len(x)])
            X = vectors_to_csr(vectors, width)
        return sparse.csc_matrix(X, dtype=np.float64)

    def staged_margins(self, X: Matrix) -> Iterator[np.ndarray]:
        """Yield the (n, K) margins after each round, in round order."""
        Xc = self._as_csc(X)
        F = np.tile(self.base_score, (Xc.shape[0], 1))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                F[:, k] += tree.apply(Xc)
            yield F.copy()

    def staged_proba_batch(self, X: Matrix) -> np.ndarray:
        """Distributions after every round, shape (M, n, K)."""
        return np.stack([softmax(F, axis=1) for F in self.staged_margins(X)])

    def predict_proba_batch(self, X: Matrix) -> np.ndarray:
        """Full-model distributions, shape (n, K)."""
        F = None
        for F in self.staged_margins(X):
            pass
        return softmax(F, axis=1)


def predict_proba(m: Ensemble, x: SparseVector) -> np.ndarray:
    """Softmax over the margins accumulated across all rounds."""
    return m.predict_proba_batch([x])[0]


def staged_proba(m: Ensemble, x: SparseVector) -> List[np.ndarray]:
    """P_1 ... P_M: the distribution after each prefix of rounds."""
    return list(m.staged_proba_batch([x])[:, 0, :])


def log_loss(m: Ensemble, X: Matrix, y: Sequence[int]) -> float:
    """Mean multiclass log-loss."""
    P = m.predict_proba_batch(X)
    y = np.asarray(y, dtype=np.int64)
    return float(-np.mean(np.log(P[np.arange(y.size), y])))


def top_k_accuracy(m: Ensemble, X: Matrix, y: Sequence[int], k: int) -> float:
    """
    Share of rows whose true class ranks among the k most probable.

    Ties rank the lower class index first.
    """
    if k < 1:
        raise EvaluationError(f"k must be >= 1, got {k}")
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise EvaluationError("top-k accuracy of an empty set is undefined")
    P = m.predict_proba_batch(X)
    if P.shape[0] != y.size:
        raise EvaluationError("X and y differ in length")
    ranked = np.argsort(-P, axis=1, kind="stable")[:, :k]
    return float(np.mean(np.any(ranked == y[:, None], axis=1)))


def encode_labels(labels: Sequence[str]) -> Tuple[Tuple[str, ...], np.ndarray]:
    """Map label strings to class indices in sorted label order."""
    classes = tuple(sorted(set(labels)))
    lookup = {c: i for i, c in enumerate(classes)}
    return classes, np.array([lookup[label] for label in labels], dtype=np.int64)


# ============================================================================
# Training
# ============================================================================


class _NodeEntries:
    """Nonzero entries owned by one node, grouped by feature and sorted by value.

    Features with fewer than ``min_leaf`` entries can never split this node or
    any node below it, so they are dropped up front. Everything here depends
    only on which rows reach the node, not on the gradients.
    """

    def __init__(
        self, cols: np.ndarray, vals: np.ndarray, rows: np.ndarray, n_rows: int, min_leaf: int
    ):
        starts = _run_starts(cols)
        counts = np.diff(np.append(starts, cols.size))
        live = counts >= min_leaf
        if not live.all():
            keep = np.repeat(live, counts)
            cols, vals, rows = cols[keep], vals[keep], rows[keep]
            starts = _run_starts(cols)
            counts = counts[live]

        size = cols.size
        self.cols, self.vals, self.rows = cols, vals, rows
        self.n_rows = n_rows
        self.starts = starts
        self.ends = starts + counts
        self.features = cols[starts]
        self.group = np.repeat(np.arange(starts.size), counts)

        # left child holds every absent (zero) row plus entries up to the threshold
        self.zero_count = n_rows - counts
        left_count = np.arange(1, size + 1) + (self.zero_count - starts)[self.group]
        candidates = np.ones(size, dtype=bool)
        candidates[:-1] = vals[1:] != vals[:-1]
        candidates[self.ends - 1] = False
        candidates &= (left_count >= min_leaf) & (n_rows - left_count >= min_leaf)
        self.candidates = candidates
        self.zero_ok = self.zero_count >= min_leaf

    @property
    def size(self) -> int:
        return self.cols.size

    def take(self, mask: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.cols[mask], self.vals[mask], self.rows[mask]


def _run_starts(cols: np.ndarray) -> np.ndarray:
    if cols.size == 0:
        return np.zeros(0, dtype=np.intp)
    return np.flatnonzero(np.concatenate(([True], cols[1:] != cols[:-1])))


class _SplitFinder:
    """Exact greedy split search over all features of a sparse matrix at once.

    Nonzero entries are kept sorted by (feature, value). One cumulative sum of
    gradients and hessians over a node's entries scores every candidate
    threshold of every feature present at the node. The root layout is shared
    by every tree.
    """

    def __init__(self, X: sparse.csc_matrix, cfg: TrainConfig):
        self.X = X
        self.cfg = cfg
        cols = np.repeat(np.arange(X.shape[1], dtype=np.int64), np.diff(X.indptr))
        order = np.lexsort((X.data, cols))
        self.root = _NodeEntries(
            cols[order], X.data[order], X.indices[order], X.shape[0], cfg.min_samples_leaf
        )

    def best_split(
        self, node: _NodeEntries, G: float, H: float, gh: np.ndarray
    ) -> Optional[Tuple[int, float]]:
        """Lowest (feature, threshold) among the splits of maximal gain, or None."""
        if node.size == 0:
            return None
        lam = self.cfg.l2_regularization

        csum = np.cumsum(gh[node.rows], axis=0)
        before = np.zeros((node.starts.size, 2))
        before[1:] = csum[node.starts[1:] - 1]
        zero = np.array([G, H]) - (csum[node.ends - 1] - before)
        left = csum + (zero - before)[node.group]

        entry_score = self._score(left[:, 0], left[:, 1], G, H, lam, node.candidates)
        zero_score = self._score(zero[:, 0], zero[:, 1], G, H, lam, node.zero_ok)

        # first maximum is the lowest feature, then the lowest value
        e = int(np.argmax(entry_score))
        z = int(np.argmax(zero_score))
        if zero_score[z] > entry_score[e] or (
            zero_score[z] == entry_score[e] and node.features[z] <= node.cols[e]
        ):
            best, feature, threshold = zero_score[z], node.features[z], 0.0
        else:
            best, feature, threshold = entry_score[e], node.cols[e], node.vals[e]
        if not np.isfinite(best) or best - G * G / (H + lam) <= self.cfg.min_split_gain:
            return None
        return int(feature), float(threshold)

    @staticmethod
    def _score(
        GL: np.ndarray, HL: np.ndarray, G: float, H: float, lam: float, ok: np.ndarray
    ) -> np.ndarray:
        GR, HR = G - GL, H - HL
        if lam <= 0:
            ok = ok & (HL > 0) & (HR > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = GL * GL / (HL + lam) + GR * GR / (HR + lam)
        return np.where(ok, score, -np.inf)


def _build_tree(
    finder: _SplitFinder, g: np.ndarray, h: np.ndarray, cfg: TrainConfig
) -> Tuple[Tree, np.ndarray]:
    """Grow one tree; returns it with the leaf value of every training row."""
    n = g.size
    gh = np.column_stack((g, h))
    nodes: List[Optional[TreeNode]] = []
    row_values = np.zeros(n, dtype=np.float64)

    def searchable(rows: np.ndarray, depth: int) -> bool:
        return depth < cfg.max_depth and rows.size >= 2 * cfg.min_samples_leaf

    def grow(rows: np.ndarray, entries: Optional[_NodeEntries], depth: int) -> int:
        index = len(nodes)
        nodes.append(None)
        G, H = gh[rows].sum(axis=0)
        split = finder.best_split(entries, G, H, gh) if entries is not None else None
        if split is None or entries is None:
            denom = H + cfg.l2_regularization
            value = 0.0 if denom <= 0 else float(-G / denom * cfg.learning_rate)
            nodes[index] = TreeNode(value=value)
            row_values[rows] = value
            return index

        feature, threshold = split
        goes_right = np.zeros(n, dtype=bool)
        start, end = finder.X.indptr[feature], finder.X.indptr[feature + 1]
        col_rows = finder.X.indices[start:end]
        goes_right[col_rows[finder.X.data[start:end] > threshold]] = True
        entry_right = goes_right[entries.rows]

        children = []
        for side_rows, side_entries in (
            (rows[~goes_right[rows]], ~entry_right),
            (rows[goes_right[rows]], entry_right),
        ):
            child = None
            if searchable(side_rows, depth + 1):
                child = _NodeEntries(
                    *entries.take(side_entries), side_rows.size, cfg.min_samples_leaf
                )
            children.append(grow(side_rows, child, depth + 1))
        nodes[index] = TreeNode(
            feature=feature, threshold=threshold, left=children[0], right=children[1]
        )
        return index

    all_rows = np.arange(n)
    grow(all_rows, finder.root if searchable(all_rows, 0) else None, 0)
    return Tree(tuple(nodes)), row_values


def _prepare_matrix(X: Matrix) -> sparse.csc_matrix:
    if isinstance(X, SparseVector):
        X = [X]
    if not sparse.issparse(X):
        vectors = list(X)
        width = max([0] + [int(x.indices[-1]) + 1 for x in vectors if len(x)])
        X = vectors_to_csr(vectors, width)
    Xc = sparse.csc_matrix(X, dtype=np.float64, copy=True)
    Xc.eliminate_zeros()
    Xc.sort_indices()
    return Xc


def train(
    X: Matrix,
    y: Sequence[int],
    cfg: Optional[TrainConfig] = None,
    n_classes: Optional[int] = None,
) -> Ensemble:
    """
    Train a multiclass boosting ensemble.

    Args:
        X: Sparse feature rows (CSR/CSC matrix or SparseVector list), non-negative
        y: Class index per row
        cfg: Training configuration; defaults apply when omitted
        n_classes: Class count K; defaults to max(y) + 1

    Returns:
        Trained Ensemble with one tree per class per round

    Raises:
        TrainError: On empty input, length mismatch, out-of-range labels,
            fewer than two distinct classes or negative feature values
    """
    cfg = cfg or TrainConfig()
    Xc = _prepare_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    n = Xc.shape[0]
    if n == 0:
        raise TrainError("cannot train on an empty matrix")
    if y.shape != (n,):
        raise TrainError(f"X has {n} rows but y has {y.size} labels")
    K = int(n_classes) if n_classes is not None else int(y.max()) + 1
    if y.min() < 0 or y.max() >= K:
        raise TrainError(f"class indices must lie in [0, {K})")
    if np.unique(y).size < 2:
        raise TrainError("training needs at least 2 distinct classes")
    if Xc.data.size and Xc.data.min() < 0:
        raise TrainError("feature values must be non-negative")

    counts = np.bincount(y, minlength=K).astype(np.float64)
    # absent classes get half a pseudo-count so the prior stays strictly positive
    base = np.log(np.where(counts > 0, counts, 0.5) / n)

    Y = np.zeros((n, K))
    Y[np.arange(n), y] = 1.0
    finder = _SplitFinder(Xc, cfg)
    F = np.tile(base, (n, 1))
    rounds: List[Tuple[Tree, ...]] = []
    losses: List[float] = []

    logger.info(
        "Training %d rounds x %d classes on %d rows, %d features",
        cfg.rounds,
        K,
        n,
        Xc.shape[1],
    )
    for m in range(cfg.rounds):
        P = softmax(F, axis=1)
        round_trees = []
        increments = []
        for k in range(K):
            g = P[:, k] - Y[:, k]
            h = P[:, k] * (1.0 - P[:, k])
            tree, values = _build_tree(finder, g, h, cfg)
            round_trees.append(tree)
            increments.append(values)
        for k, values in enumerate(increments):
            F[:, k] += values
        rounds.append(tuple(round_trees))

        P = softmax(F, axis=1)
        loss = float(-np.mean(np.log(P[np.arange(n), y])))
        losses.append(loss)
        logger.debug("round %d: log-loss %.6f", m + 1, loss)
        if (m + 1) % 10 == 0 or m + 1 == cfg.rounds:
            logger.info("round %d/%d: training log-loss %.6f", m + 1, cfg.rounds, loss)

    return Ensemble(
        n_classes=K,
        learning_rate=cfg.learning_rate,
        base_score=base,
        trees=tuple(rounds),
        n_features=Xc.shape[1],
        train_loss=tuple(losses),
    )
