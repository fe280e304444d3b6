"""Train -> attack -> score glue shared by the CLI, scripts and tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attack import AttackConfig, AttackTrace, baseline_attribute_similarity, baseline_map, \
    run_graphmi, select_known_nodes
from .evaluation import EvalSet, auc, ap, build_eval_set
from .gae import postprocess
from .gcn import GcnModel, TrainConfig, accuracy, train_gcn
from .graph import Graph, vec_to_matrix


@dataclass
class AttackResult:
    adj_vector: np.ndarray
    prob_matrix: np.ndarray
    trace: AttackTrace
    known_nodes: np.ndarray


def attack(model: GcnModel, graph: Graph, config: AttackConfig) -> AttackResult:
    known = select_known_nodes(graph.num_nodes, config.label_fraction, config.seed)
    a, trace = run_graphmi(model, graph.features, graph.labels, known, config)
    return AttackResult(a, postprocess(model, a, graph.features), trace, known)


def score(matrix, eval_set: EvalSet) -> tuple[float, float]:
    s = eval_set.scores_from(matrix)
    return auc(s, eval_set.labels), ap(s, eval_set.labels)


@dataclass
class RunSummary:
    train_accuracy: float
    val_accuracy: float
    graphmi_auc: float
    graphmi_ap: float
    raw_auc: float
    raw_ap: float
    map_auc: float
    map_ap: float
    attr_sim_auc: float
    attr_sim_ap: float


def run_once(graph: Graph, train_cfg: TrainConfig, attack_cfg: AttackConfig,
             eval_seed: int = 0, baselines: bool = True, model: GcnModel | None = None) -> RunSummary:
    """Train a target (unless given), attack it and score every method on one eval set."""
    if model is None:
        model = train_gcn(graph, train_cfg)
    a_true = graph.adj_vector
    train_nodes = model.train_meta.get("train_nodes") or list(range(graph.num_nodes))
    val_nodes = model.train_meta.get("val_nodes") or train_nodes
    train_acc = accuracy(model, a_true, graph.features, graph.labels, train_nodes)
    val_acc = accuracy(model, a_true, graph.features, graph.labels, val_nodes)

    eval_set = build_eval_set(graph, eval_seed)
    res = attack(model, graph, attack_cfg)
    g_auc, g_ap = score(res.prob_matrix, eval_set)
    r_auc, r_ap = score(vec_to_matrix(res.adj_vector, graph.num_nodes), eval_set)
    m_auc = m_ap = s_auc = s_ap = float("nan")
    if baselines:
        a_map = baseline_map(model, graph.features, graph.labels, res.known_nodes, attack_cfg)
        m_auc, m_ap = score(vec_to_matrix(a_map, graph.num_nodes), eval_set)
        s_auc, s_ap = score(baseline_attribute_similarity(graph.features), eval_set)
    return RunSummary(train_acc, val_acc, g_auc, g_ap, r_auc, r_ap, m_auc, m_ap, s_auc, s_ap)
