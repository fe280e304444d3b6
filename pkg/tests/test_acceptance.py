"""Acceptance criteria, each checked at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import os
import time

import numpy as np
import pytest

from graphmi import (AttackConfig, DefenseConfig, DpConfig, SampleConfig, SbmSpec, TrainConfig,
                     adversary_advantage, ap, auc, attack_grad, attack_loss, build_eval_set,
                     generate_sbm, load_graph, normalize_adjacency, train_gcn, vec_to_matrix)
from graphmi.attack import finite_difference_grad, max_relative_error, project_unit_interval
from graphmi.data import bundle_from_env
from graphmi.defense import defense_experiment, threshold_for_added
from graphmi.evaluation import influence_stratified_report
from graphmi.gcn import accuracy, gcn_forward
from graphmi.graph import matrix_to_vec, smoothness_loss
from graphmi.pipeline import attack, run_once
from graphmi.sampling import draw_candidates

import oracles
from conftest import random_graph, random_model, record

SEEDS = range(5)


def _sbm(seed):
    return generate_sbm(SbmSpec(nodes_per_block=50, num_blocks=2, p_in=0.3, p_out=0.02,
                                feature_signal=0.3, seed=seed))


def test_1_gradient_correctness():
    start, worst = time.perf_counter(), 0.0
    for k in range(20):
        n = (4, 6, 8)[k % 3]
        rng = np.random.default_rng(100 + k)
        g = random_graph(rng, n, num_classes=3)
        m = random_model(rng, num_classes=3)
        a = rng.uniform(0.05, 0.95, size=n * (n - 1) // 2)
        alpha, beta = (0.0, 0.0) if k < 5 else (rng.uniform(0.01, 1), rng.uniform(0.01, 1))
        fn = lambda v: attack_loss(v, m, g.features, g.labels, np.arange(n), alpha, beta)  # noqa: E731
        exact = attack_grad(a, m, g.features, g.labels, np.arange(n), alpha, beta)
        worst = max(worst, max_relative_error(finite_difference_grad(fn, a, 1e-5), exact))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 60
    record("1 gradient correctness", ok, f"max rel err {worst:.2e} over 20 instances, {elapsed:.1f}s")
    assert ok


def test_2_oracle_equivalence():
    errs = {}
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        g = random_graph(rng, n)
        m = random_model(rng)
        H, Z = gcn_forward(m, g.adj_vector, g.features)
        Hr, Zr = oracles.gcn_logits(m.w0, m.w1, g.adjacency, g.features)
        errs["gcn_forward"] = max(errs.get("gcn_forward", 0), np.abs(Z - Zr).max(), np.abs(H - Hr).max())
        a = rng.random(n * (n - 1) // 2)
        A = vec_to_matrix(a)
        errs["normalize"] = max(errs.get("normalize", 0), np.abs(normalize_adjacency(A) - oracles.normalize(A)).max())
        pw, tr = oracles.smoothness_pairwise(A, g.features), oracles.smoothness_trace(A, g.features)
        rel = max(abs(smoothness_loss(a, g.features) - pw), abs(tr - pw)) / max(abs(pw), 1e-12)
        errs["smoothness"] = max(errs.get("smoothness", 0), rel)
        y = rng.integers(0, 2, 12)
        y[:2] = [0, 1]
        s = rng.integers(0, 5, 12) / 4
        errs["auc"] = max(errs.get("auc", 0), abs(auc(s, y) - oracles.auc_pairs(s, y)))
        errs["ap"] = max(errs.get("ap", 0), abs(ap(s, y) - oracles.ap_steps(s, y)))
    hand = {
        "auc hand": abs(auc([0.9, 0.8, 0.8, 0.1], [1, 0, 1, 0]) - 0.875),
        "ap hand": abs(ap([0.9, 0.7, 0.5], [1, 0, 1]) - 5 / 6),
        "advantage hand": abs(adversary_advantage(0.9, 0.2) - 0.74),
        "smoothness hand": abs(smoothness_loss(np.array([1.0]), np.array([[1.0], [0.0]])) - 1.0),
        "normalize hand": np.abs(normalize_adjacency(np.array([[0.0, 1], [1, 0]])) - 0.5).max(),
    }
    errs.update(hand)
    ok = all(v <= 1e-9 for v in errs.values())
    record("2 oracle equivalence", ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
    assert ok


def test_3_codec_projection_sampler_invariants():
    rng = np.random.default_rng(1)
    checks = {}
    checks["codec"] = all(
        np.array_equal(matrix_to_vec(vec_to_matrix(a)), a)
        for a in (rng.random(n * (n - 1) // 2) for n in range(2, 51)))
    x = rng.normal(scale=3, size=200)
    p = project_unit_interval(x)
    checks["projection"] = bool(np.all((p >= 0) & (p <= 1)) and np.array_equal(project_unit_interval(p), p))
    scores = np.where(rng.random(45) < 0.3, 0.0, rng.random(45))
    cands = draw_candidates(scores, SampleConfig(trials=50, edge_density=0.2, seed=2))
    checks["cardinality"] = all(v.sum() == 9 for v in cands)
    checks["zero mass"] = not any(v[scores == 0].any() for v in cands)
    counts = np.sum(draw_candidates(np.array([0.5, 0.3, 0.2]),
                                    SampleConfig(trials=10_000, edge_density=0.34, seed=0)), axis=0)
    freq = counts / 10_000
    checks["frequencies"] = bool(np.all(np.abs(freq - [0.5, 0.3, 0.2]) <= 0.02))
    ok = all(checks.values())
    record("3 codec/projection/sampler", ok,
           ", ".join(f"{k} {'ok' if v else 'BAD'}" for k, v in checks.items()) + f"; freq {np.round(freq, 3).tolist()}")
    assert ok


@pytest.fixture(scope="module")
def sbm_runs():
    start = time.perf_counter()
    runs = [run_once(_sbm(s), TrainConfig(seed=s), AttackConfig(seed=s), eval_seed=s) for s in SEEDS]
    return runs, time.perf_counter() - start


def test_4_attack_efficacy(sbm_runs):
    runs, elapsed = sbm_runs
    train_acc = min(r.train_accuracy for r in runs)
    gm = np.mean([r.graphmi_auc for r in runs])
    mp = np.mean([r.map_auc for r in runs])
    ok = train_acc >= 0.9 and gm >= 0.75 and gm > mp and elapsed < 300
    record("4 attack efficacy", ok, f"min train acc {train_acc:.3f}, GraphMI AUC {gm:.4f} vs MAP {mp:.4f} "
           f"(attr-sim {np.mean([r.attr_sim_auc for r in runs]):.4f}, raw {np.mean([r.raw_auc for r in runs]):.4f}), "
           f"{elapsed:.1f}s")
    assert ok


def test_5_influence_monotonicity():
    start = time.perf_counter()
    top, bottom = [], []
    for s in SEEDS:
        g = _sbm(s)
        m = train_gcn(g, TrainConfig(seed=s))
        P = attack(m, g, AttackConfig(seed=s)).prob_matrix
        rep = influence_stratified_report(m, g, P, num_buckets=5, seed=s)
        bottom.append(rep.buckets[0].auc)
        top.append(rep.buckets[-1].auc)
    elapsed = time.perf_counter() - start
    ok = np.mean(top) >= np.mean(bottom) and elapsed < 300
    record("5 influence monotonicity", ok,
           f"top-bucket AUC {np.mean(top):.4f} vs bottom {np.mean(bottom):.4f}, {elapsed:.1f}s")
    assert ok


def test_6_dp_tradeoff():
    start = time.perf_counter()
    sigmas = (0.0, 0.5, 1.0, 2.0)
    accs, aucs = [], []
    for sigma in sigmas:
        a_acc, a_auc = [], []
        for s in SEEDS:
            g = _sbm(s)
            r = run_once(g, TrainConfig(seed=s, dp=DpConfig(clip_norm=1.0, noise_multiplier=sigma)),
                         AttackConfig(seed=s), eval_seed=s, baselines=False)
            a_acc.append(r.val_accuracy)
            a_auc.append(r.graphmi_auc)
        accs.append(np.mean(a_acc))
        aucs.append(np.mean(a_auc))
    elapsed = time.perf_counter() - start
    ok = all(np.diff(accs) <= 0) and all(np.diff(aucs) <= 0) and elapsed < 600
    record("6 DP tradeoff", ok, f"sigma {list(sigmas)}: val acc {np.round(accs, 4).tolist()}, "
           f"AUC {np.round(aucs, 4).tolist()}, {elapsed:.1f}s")
    assert ok


# Thresholds adding these fractions of each graph's non-edges (by descending similarity).
DEFENSE_FRACTIONS = (0.0, 0.25, 0.5, 0.75)


def test_7_defense_direction():
    start = time.perf_counter()
    aucs = np.zeros((len(DEFENSE_FRACTIONS), len(SEEDS)))
    noop_identical = True
    for j, s in enumerate(SEEDS):
        g = _sbm(s)
        non_edges = g.num_nodes * (g.num_nodes - 1) // 2 - g.num_edges
        for i, frac in enumerate(DEFENSE_FRACTIONS):
            t = threshold_for_added(g.features, g.adjacency, int(round(frac * non_edges)))
            rep = defense_experiment(g, TrainConfig(seed=s), AttackConfig(seed=s), DefenseConfig(t), eval_seed=s)
            aucs[i, j] = rep.defended.attack_auc
            if frac == 0:
                noop_identical &= rep.defended == rep.undefended and rep.defended.num_added == 0
    means = aucs.mean(axis=1)
    elapsed = time.perf_counter() - start
    ok = bool(noop_identical and np.all(np.diff(means) <= 0) and elapsed < 300)
    record("7 defense direction", ok, f"added fraction {list(DEFENSE_FRACTIONS)}: AUC {np.round(means, 4).tolist()}, "
           f"no-op identical {noop_identical}, {elapsed:.1f}s")
    assert ok


@pytest.mark.skipif(not os.environ.get("GRAPHMI_CORA_DIR"), reason="GRAPHMI_CORA_DIR not set")
def test_8_cora_conditional():
    start = time.perf_counter()
    g = load_graph(bundle_from_env())
    stats = (g.num_nodes, g.num_edges, g.num_classes, g.num_features)
    r = run_once(g, TrainConfig(seed=0), AttackConfig(seed=0), baselines=False)
    elapsed = time.perf_counter() - start
    ok = stats == (2708, 5429, 7, 1433) and r.graphmi_auc >= 0.80 and elapsed < 1800
    record("8 Cora (conditional)", ok, f"stats {stats}, AUC {r.graphmi_auc:.4f}, {elapsed:.0f}s")
    assert ok


def test_8_cora_skip_notice():
    if not os.environ.get("GRAPHMI_CORA_DIR"):
        record("8 Cora (conditional)", None, "not run: set GRAPHMI_CORA_DIR to a Cora bundle to run")
