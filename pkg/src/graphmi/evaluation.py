"""Ranking metrics, evaluation pairs, edge influence and the adversary advantage."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .gcn import GcnModel, cross_entropy, forward_dense, predict
from .graph import Graph


@dataclass(frozen=True)
class EvalSet:
    pairs: np.ndarray  # (m, 2) int, i < j
    labels: np.ndarray  # (m,) in {0, 1}
    seed: int

    @property
    def num_positive(self) -> int:
        return int(self.labels.sum())

    def scores_from(self, score_matrix) -> np.ndarray:
        S = np.asarray(score_matrix)
        return S[self.pairs[:, 0], self.pairs[:, 1]]


@dataclass
class EvalReport:
    auc: float
    ap: float
    num_pairs: int
    config_echo: dict = field(default_factory=dict)
    per_edge_scores: list | None = None


def build_eval_set(graph: Graph, seed: int = 0) -> EvalSet:
    """All true edges plus an equal number of uniformly sampled non-edges."""
    upper = np.triu(np.ones_like(graph.adjacency, dtype=bool), k=1)
    pos = np.argwhere(upper & (graph.adjacency == 1))
    non = np.argwhere(upper & (graph.adjacency == 0))
    if len(pos) == 0:
        raise ValueError("graph has no edges to evaluate")
    if len(non) == 0:
        raise ValueError("graph is complete; no non-edges to sample")
    if len(non) < len(pos):
        raise ValueError(f"only {len(non)} non-edges for {len(pos)} edges; cannot balance")
    rng = np.random.default_rng(seed)
    neg = non[np.sort(rng.choice(len(non), size=len(pos), replace=False))]
    pairs = np.vstack([pos, neg]).astype(np.int64)
    labels = np.concatenate([np.ones(len(pos), dtype=np.int64), np.zeros(len(neg), dtype=np.int64)])
    return EvalSet(pairs, labels, seed)


def _validate(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D of equal length")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    return scores, labels.astype(bool)


def auc(scores, labels) -> float:
    """Mann-Whitney estimate of ROC AUC; ties get half credit via midranks."""
    scores, labels = _validate(scores, labels)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative labels")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def ap(scores, labels) -> float:
    """Mean of precision@rank over positives, descending score, ties by index."""
    scores, labels = _validate(scores, labels)
    if not labels.any():
        raise ValueError("AP needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    hits = labels[order]
    precision = np.cumsum(hits) / np.arange(1, hits.size + 1)
    return float(precision[hits].mean())


def roc_points(scores, labels) -> np.ndarray:
    """(fpr, tpr) vertices of the ROC curve, thresholds at distinct scores."""
    scores, labels = _validate(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    distinct = np.r_[np.nonzero(np.diff(s))[0], y.size - 1]
    tp = np.cumsum(y)[distinct]
    fp = (distinct + 1) - tp
    tpr = np.r_[0.0, tp / max(labels.sum(), 1)]
    fpr = np.r_[0.0, fp / max((~labels).sum(), 1)]
    return np.column_stack([fpr, tpr])


def evaluate_scores(score_matrix, eval_set: EvalSet, config_echo=None,
                    keep_scores: bool = False) -> EvalReport:
    scores = eval_set.scores_from(score_matrix)
    per_edge = None
    if keep_scores:
        per_edge = [[int(i), int(j), int(y), float(v)]
                    for (i, j), y, v in zip(eval_set.pairs, eval_set.labels, scores)]
    return EvalReport(auc(scores, eval_set.labels), ap(scores, eval_set.labels),
                      len(eval_set.labels), dict(config_echo or {}), per_edge)


def _acc(model, A, X, Y) -> float:
    return float(np.mean(predict(model, A, X) == Y))


def edge_influence(model: GcnModel, graph: Graph, edge: tuple[int, int]) -> float:
    """Accuracy over all nodes with the edge minus accuracy with it removed."""
    i, j = edge
    if not (0 <= i < graph.num_nodes and 0 <= j < graph.num_nodes) or graph.adjacency[i, j] != 1:
        raise ValueError(f"({i}, {j}) is not an edge of the graph")
    A = np.array(graph.adjacency)
    base = _acc(model, A, graph.features, graph.labels)
    A[i, j] = A[j, i] = 0.0
    return base - _acc(model, A, graph.features, graph.labels)


@dataclass
class EdgeInfluences:
    """Per-edge influence in ``graph.edge_list()`` order.

    ``accuracy`` is the accuracy drop on removal; ``loss`` is the increase of
    the mean cross-entropy over all nodes on removal, a continuous companion
    used to order edges whose accuracy influence ties.
    """

    edges: np.ndarray
    accuracy: np.ndarray
    loss: np.ndarray

    def order(self) -> np.ndarray:
        """Ascending by accuracy influence, then loss influence, then edge order."""
        return np.lexsort((np.arange(len(self.edges)), self.loss, self.accuracy))


def all_edge_influences(model: GcnModel, graph: Graph) -> EdgeInfluences:
    edges = np.array(graph.edge_list(), dtype=np.int64).reshape(-1, 2)
    A = np.array(graph.adjacency)
    X, Y = graph.features, graph.labels
    nodes = np.arange(graph.num_nodes)

    def measure():
        logits = forward_dense(model, A, X).logits
        return float(np.mean(logits.argmax(axis=1) == Y)), cross_entropy(logits, Y, nodes)[0]

    base_acc, base_loss = measure()
    acc = np.empty(len(edges))
    loss = np.empty(len(edges))
    for k, (i, j) in enumerate(edges):
        A[i, j] = A[j, i] = 0.0
        a_k, l_k = measure()
        acc[k], loss[k] = base_acc - a_k, l_k - base_loss
        A[i, j] = A[j, i] = 1.0
    return EdgeInfluences(edges, acc, loss)


@dataclass
class InfluenceBucket:
    index: int
    num_edges: int
    influence_min: float
    influence_max: float
    influence_mean: float
    loss_influence_mean: float
    auc: float


@dataclass
class InfluenceReport:
    buckets: list[InfluenceBucket]
    degenerate: bool
    num_negatives: int
    influences: EdgeInfluences = field(repr=False)


def influence_stratified_report(model: GcnModel, graph: Graph, prob_matrix, num_buckets: int = 5,
                                seed: int = 0, influences: EdgeInfluences | None = None
                                ) -> InfluenceReport:
    """Per-bucket AUC of true edges sorted by influence (bucket 0 = lowest).

    Every bucket's edges are scored against the same sampled non-edges.
    ``degenerate`` flags that all accuracy influences are equal, in which case
    the ordering comes from the loss influence alone.
    """
    infl = influences if influences is not None else all_edge_influences(model, graph)
    edges = infl.edges
    if len(edges) < num_buckets:
        raise ValueError(f"{len(edges)} edges cannot fill {num_buckets} buckets")
    eval_set = build_eval_set(graph, seed)
    P = np.asarray(prob_matrix)
    neg_scores = eval_set.scores_from(P)[eval_set.labels == 0]
    buckets = []
    for b, idx in enumerate(np.array_split(infl.order(), num_buckets)):
        pos_scores = P[edges[idx, 0], edges[idx, 1]]
        scores = np.r_[pos_scores, neg_scores]
        labels = np.r_[np.ones(len(idx)), np.zeros(len(neg_scores))]
        acc = infl.accuracy[idx]
        buckets.append(InfluenceBucket(b, len(idx), float(acc.min()), float(acc.max()),
                                       float(acc.mean()), float(infl.loss[idx].mean()),
                                       auc(scores, labels)))
    degenerate = bool(np.all(infl.accuracy == infl.accuracy[0]))
    return InfluenceReport(buckets, degenerate, len(neg_scores), infl)


def adversary_advantage(p: float, q: float) -> float:
    """``p(1-q) + q(1-p)`` for accuracies with (p) and without (q) an edge, q <= p."""
    if not (0 <= q <= 1 and 0 <= p <= 1):
        raise ValueError("p and q must lie in [0, 1]")
    if q > p:
        raise ValueError(f"expected q <= p, got p={p}, q={q}")
    return p * (1 - q) + q * (1 - p)
