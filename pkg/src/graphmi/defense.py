"""Pseudo-edge preprocessing defense: connect feature-similar non-adjacent pairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attack import AttackConfig, baseline_attribute_similarity
from .evaluation import build_eval_set
from .gcn import TrainConfig, accuracy, train_gcn
from .graph import Graph
from .pipeline import attack, score


@dataclass(frozen=True)
class DefenseConfig:
    threshold: float = 0.9
    report_added: bool = False

    def __post_init__(self):
        if not -1 <= self.threshold <= 1:
            raise ValueError("threshold must lie in the cosine range [-1, 1]")


def similarity_matrix(X) -> np.ndarray:
    """Cosine similarity of feature rows; zero rows and the diagonal are 0."""
    return baseline_attribute_similarity(X)


def apply_defense(A, X, config: DefenseConfig) -> tuple[np.ndarray, list[tuple[int, int]]]:
    A = np.asarray(A, dtype=float)
    S = similarity_matrix(X)
    add = np.triu((S > config.threshold) & (A == 0), k=1)
    rows, cols = np.nonzero(add)
    out = A.copy()
    out[rows, cols] = 1.0
    out[cols, rows] = 1.0
    return out, list(zip(rows.tolist(), cols.tolist()))


def threshold_for_added(X, A, num_added: int) -> float:
    """Threshold at which roughly ``num_added`` pseudo edges get added.

    Returns the max non-edge similarity (a no-op threshold) when ``num_added`` is 0.
    """
    S = similarity_matrix(X)
    cand = S[np.triu(np.asarray(A) == 0, k=1)]
    cand = np.sort(cand)[::-1]
    if num_added <= 0 or cand.size == 0:
        return float(cand.max()) if cand.size else 1.0
    k = min(num_added, cand.size)
    return float(cand[k]) if k < cand.size else max(-1.0, float(cand[-1]) - 1e-12)


@dataclass
class DefenseArm:
    utility_acc: float
    attack_auc: float
    attack_ap: float
    num_added: int


@dataclass
class DefenseReport:
    undefended: DefenseArm
    defended: DefenseArm
    threshold: float
    added_edges: list | None = None


def defense_experiment(graph: Graph, train_cfg: TrainConfig, attack_cfg: AttackConfig,
                       defense_cfg: DefenseConfig, eval_seed: int = 0) -> DefenseReport:
    """Train on the original and the defended graph, attack both with the same seeds.

    Attack success is always measured against the original edges; utility is
    validation accuracy of each model on the graph it was trained on.
    """
    eval_set = build_eval_set(graph, eval_seed)
    A_def, added = apply_defense(graph.adjacency, graph.features, defense_cfg)
    arms = []
    for g, n_added in ((graph, 0), (graph.with_adjacency(A_def), len(added))):
        model = train_gcn(g, train_cfg)
        val_nodes = model.train_meta["val_nodes"] or model.train_meta["train_nodes"]
        util = accuracy(model, g.adj_vector, g.features, g.labels, val_nodes)
        res = attack(model, g, attack_cfg)
        a_auc, a_ap = score(res.prob_matrix, eval_set)
        arms.append(DefenseArm(util, a_auc, a_ap, n_added))
    return DefenseReport(arms[0], arms[1], defense_cfg.threshold,
                         added if defense_cfg.report_added else None)
