"""Command line entry point: ``graphmi <subcommand> [options]``.

Every subcommand reads one JSON config (``--config``) layered over built-in
defaults, then ``--set section.key=value`` overrides and the dedicated path
flags. The fully resolved config is echoed into every report it writes.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .attack import (AttackConfig, AttackError, attack_loss, baseline_attribute_similarity,
                     baseline_map, select_known_nodes)
from .data import DatasetBundle, SbmSpec, generate_sbm, load_graph, write_edges, write_graph
from .defense import DefenseConfig, defense_experiment
from .evaluation import (build_eval_set, evaluate_scores, influence_stratified_report, roc_points)
from .gcn import DpConfig, TrainConfig, TrainingError, accuracy, train_gcn
from .graph import Graph, matrix_to_vec, vec_to_matrix
from .pipeline import attack, score
from .sampling import SampleConfig, sample_binary
from .serialize import (FormatError, load_checkpoint, load_json, load_probs, save_checkpoint,
                        save_probs, save_report, to_jsonable, write_csv)

log = logging.getLogger("graphmi")

SWEEP_PARAMS = ("label_fraction", "alpha", "beta", "dp_sigma")


class ConfigError(ValueError):
    pass


def _defaults(cls) -> dict:
    return {f.name: f.default for f in dataclasses.fields(cls)
            if f.default is not dataclasses.MISSING and f.name != "dp"}


def default_config() -> dict:
    return {
        "graph": {"dir": None, "onehot_features": False},
        "sbm": _defaults(SbmSpec),
        "train": _defaults(TrainConfig),
        "dp": None,
        "attack": _defaults(AttackConfig),
        "sample": _defaults(SampleConfig),
        "defense": _defaults(DefenseConfig),
        "influence": {"num_buckets": 5},
        "sweep": {"param": "label_fraction", "values": [1.0, 0.5, 0.2], "seeds": [0]},
        "eval_seed": 0,
        "checkpoint": None,
        "probs": None,
    }


def _merge(base: dict, update: dict, where: str = "") -> dict:
    for key, value in update.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, f"{where}{key}.")
        elif key == "dp" and isinstance(value, dict):
            base[key] = {**_defaults(DpConfig), **(base[key] or {}), **value}
        else:
            base[key] = value
    return base


def _parse_override(item: str) -> dict:
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like section.key=value")
    path, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    out: dict = {}
    node = out
    keys = path.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
    return out


def resolve_config(config_path=None, overrides=(), **paths) -> dict:
    cfg = default_config()
    if config_path:
        try:
            doc = load_json(config_path)
        except (OSError, FormatError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if doc.get("format"):
            # a report or checkpoint: reuse the config it echoes
            doc = doc.get("config_echo", doc.get("config", {}))
        _merge(cfg, doc)
    for item in overrides:
        _merge(cfg, _parse_override(item))
    if paths.get("graph"):
        cfg["graph"]["dir"] = str(paths["graph"])
    for key in ("checkpoint", "probs"):
        if paths.get(key):
            cfg[key] = str(paths[key])
    return cfg


def _build(cls, section: dict, name: str):
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}") from None


def train_config(cfg: dict) -> TrainConfig:
    dp = _build(DpConfig, cfg["dp"], "dp") if cfg.get("dp") else None
    return dataclasses.replace(_build(TrainConfig, cfg["train"], "train"), dp=dp)


def attack_config(cfg: dict) -> AttackConfig:
    return _build(AttackConfig, cfg["attack"], "attack")


def get_graph(cfg: dict) -> Graph:
    g = cfg["graph"]
    if g.get("dir"):
        bundle = DatasetBundle.from_dir(g["dir"], onehot_features=bool(g.get("onehot_features")))
        return load_graph(bundle)
    return generate_sbm(_build(SbmSpec, cfg["sbm"], "sbm"))


def _require(cfg: dict, key: str) -> str:
    if not cfg.get(key):
        raise ConfigError(f"--{key} is required")
    return cfg[key]


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_roc(scores_matrix, eval_set, path) -> None:
    s = eval_set.scores_from(scores_matrix)
    write_csv(path, ["fpr", "tpr"], roc_points(s, eval_set.labels).tolist())


# subcommands ---------------------------------------------------------------

def cmd_gen_sbm(cfg: dict, args) -> int:
    graph = generate_sbm(_build(SbmSpec, cfg["sbm"], "sbm"))
    write_graph(graph, args.out)
    print(f"wrote {graph.num_nodes} nodes, {graph.num_edges} edges to {args.out}")
    return 0


def cmd_train(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    tc = train_config(cfg)
    model = train_gcn(graph, tc)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, args.out, cfg)
    train_acc = accuracy(model, graph.adj_vector, graph.features, graph.labels,
                         model.train_meta["train_nodes"])
    print(f"epochs={model.train_meta['epochs_run']} train_acc={train_acc:.4f} "
          f"val_acc={model.train_meta['val_accuracy']:.4f} -> {args.out}")
    return 0


def cmd_attack(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    model = load_checkpoint(_require(cfg, "checkpoint"))
    ac = attack_config(cfg)
    out = _out_dir(args.out)
    res = attack(model, graph, ac)
    eval_set = build_eval_set(graph, cfg["eval_seed"])
    report = evaluate_scores(res.prob_matrix, eval_set, cfg, keep_scores=args.per_edge)
    raw_auc, raw_ap = score(vec_to_matrix(res.adj_vector, graph.num_nodes), eval_set)
    a_map = baseline_map(model, graph.features, graph.labels, res.known_nodes, ac)
    map_auc, map_ap = score(vec_to_matrix(a_map, graph.num_nodes), eval_set)
    sim_auc, sim_ap = score(baseline_attribute_similarity(graph.features), eval_set)

    save_probs(res.prob_matrix, out / "probs.json", cfg)
    write_csv(out / "trace.csv", ["iteration", "attack_loss"], enumerate(res.trace.loss_history))
    _write_roc(res.prob_matrix, eval_set, out / "roc.csv")
    save_report({
        "kind": "attack",
        **to_jsonable(report),
        "raw_vector": {"auc": raw_auc, "ap": raw_ap},
        "baselines": {"map": {"auc": map_auc, "ap": map_ap},
                      "attr_sim": {"auc": sim_auc, "ap": sim_ap}},
        "trace": {"best_iteration": res.trace.best_iteration,
                  "initial_loss": res.trace.loss_history[0],
                  "best_loss": res.trace.loss_history[res.trace.best_iteration],
                  "final_loss": res.trace.loss_history[-1],
                  "wall_time": res.trace.wall_time,
                  "grad_check_error": res.trace.grad_check_error},
    }, out / "report.json")
    print(f"auc={report.auc:.4f} ap={report.ap:.4f} (map auc={map_auc:.4f}) -> {out}")
    return 0


def cmd_sample(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    model = load_checkpoint(_require(cfg, "checkpoint"))
    P = load_probs(_require(cfg, "probs"))
    if P.shape[0] != graph.num_nodes:
        raise FormatError(f"probability matrix has N={P.shape[0]}, graph has {graph.num_nodes}")
    sc = _build(SampleConfig, cfg["sample"], "sample")
    if sc.edge_density is None:
        # Auxiliary knowledge: the attacker is granted the true edge density.
        sc = dataclasses.replace(sc, edge_density=graph.edge_density())
    ac = attack_config(cfg)
    known = select_known_nodes(graph.num_nodes, ac.label_fraction, ac.seed)
    loss_fn = lambda v: attack_loss(v, model, graph.features, graph.labels, known,  # noqa: E731
                                    ac.alpha, ac.beta)
    A = sample_binary(matrix_to_vec(_sym(P)), loss_fn, sc)
    write_edges(graph.with_adjacency(A).edge_list(), args.out)
    print(f"sampled {int(A.sum() // 2)} edges -> {args.out}")
    return 0


def _sym(P):
    S = (P + P.T) / 2
    np.fill_diagonal(S, 0.0)
    return S


def cmd_evaluate(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    P = load_probs(_require(cfg, "probs"))
    if P.shape[0] != graph.num_nodes:
        raise FormatError(f"score matrix has N={P.shape[0]}, graph has {graph.num_nodes}")
    eval_set = build_eval_set(graph, cfg["eval_seed"])
    report = evaluate_scores(P, eval_set, cfg, keep_scores=args.per_edge)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_report({"kind": "evaluate", **to_jsonable(report)}, out)
    _write_roc(P, eval_set, out.with_name(out.stem + "_roc.csv"))
    print(f"auc={report.auc:.4f} ap={report.ap:.4f} -> {out}")
    return 0


def cmd_influence(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    model = load_checkpoint(_require(cfg, "checkpoint"))
    if cfg.get("probs"):
        P = load_probs(cfg["probs"])
    else:
        P = attack(model, graph, attack_config(cfg)).prob_matrix
    out = _out_dir(args.out)
    rep = influence_stratified_report(model, graph, P, int(cfg["influence"]["num_buckets"]),
                                      seed=cfg["eval_seed"])
    inf = rep.influences
    write_csv(out / "influence.csv", ["i", "j", "accuracy_influence", "loss_influence", "score"],
              ([int(i), int(j), a, l, float(P[i, j])]
               for (i, j), a, l in zip(inf.edges, inf.accuracy, inf.loss)))
    save_report({"kind": "influence", "degenerate": rep.degenerate,
                 "num_negatives": rep.num_negatives,
                 "buckets": to_jsonable(rep.buckets), "config_echo": cfg}, out / "report.json")
    for b in rep.buckets:
        print(f"bucket {b.index}: n={b.num_edges} influence=[{b.influence_min:.4f}, "
              f"{b.influence_max:.4f}] auc={b.auc:.4f}")
    if rep.degenerate:
        print("note: every edge has the same accuracy influence; buckets ordered by loss influence")
    return 0


def cmd_defend(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    dc = _build(DefenseConfig, cfg["defense"], "defense")
    rep = defense_experiment(graph, train_config(cfg), attack_config(cfg), dc, cfg["eval_seed"])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_report({"kind": "defense", **to_jsonable(rep), "config_echo": cfg}, out)
    print(f"undefended: acc={rep.undefended.utility_acc:.4f} auc={rep.undefended.attack_auc:.4f} | "
          f"defended (+{rep.defended.num_added} edges): acc={rep.defended.utility_acc:.4f} "
          f"auc={rep.defended.attack_auc:.4f}")
    return 0


def sweep_rows(graph: Graph, cfg: dict) -> list[list]:
    """One row per grid value, metrics averaged over the configured seeds."""
    sw = cfg["sweep"]
    param = sw["param"]
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep.param must be one of {SWEEP_PARAMS}, got {param!r}")
    base_train, base_attack = train_config(cfg), attack_config(cfg)
    models: dict = {}
    rows = []
    for value in sw["values"]:
        aucs, aps, accs = [], [], []
        for seed in sw["seeds"]:
            tc = dataclasses.replace(base_train, seed=seed)
            ac = dataclasses.replace(base_attack, seed=seed)
            if param == "dp_sigma":
                dp = tc.dp or DpConfig()
                tc = dataclasses.replace(tc, dp=dataclasses.replace(dp, noise_multiplier=float(value)))
            else:
                try:
                    ac = dataclasses.replace(ac, **{param: float(value)})
                except ValueError as exc:
                    raise ConfigError(f"sweep value {value!r}: {exc}") from None
            key = (seed, tc.dp)
            if key not in models:
                models[key] = train_gcn(graph, tc)
            model = models[key]
            res = attack(model, graph, ac)
            a, p = score(res.prob_matrix, build_eval_set(graph, cfg["eval_seed"] + seed))
            aucs.append(a)
            aps.append(p)
            val_nodes = model.train_meta["val_nodes"] or model.train_meta["train_nodes"]
            accs.append(accuracy(model, graph.adj_vector, graph.features, graph.labels, val_nodes))
        rows.append([param, value, len(sw["seeds"]), np.mean(aucs), np.std(aucs),
                     np.mean(aps), np.std(aps), np.mean(accs)])
    return rows


SWEEP_HEADER = ["param", "value", "num_seeds", "auc_mean", "auc_std", "ap_mean", "ap_std",
                "val_acc_mean"]


def cmd_sweep(cfg: dict, args) -> int:
    graph = get_graph(cfg)
    rows = sweep_rows(graph, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, SWEEP_HEADER, rows)
    Path(str(out) + ".config.json").write_text(json.dumps(to_jsonable(cfg), indent=2) + "\n")
    for r in rows:
        print(f"{r[0]}={r[1]}: auc={r[3]:.4f} ap={r[5]:.4f} val_acc={r[7]:.4f}")
    return 0


# parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


COMMANDS = {
    "gen-sbm": (cmd_gen_sbm, "generate a stochastic block model dataset directory"),
    "train": (cmd_train, "train the GCN target model and write a checkpoint"),
    "attack": (cmd_attack, "run GraphMI against a checkpoint and evaluate it"),
    "sample": (cmd_sample, "sample a binary edge list from an edge-probability file"),
    "evaluate": (cmd_evaluate, "AUC/AP of an edge-score file against a graph"),
    "influence": (cmd_influence, "per-edge influence and influence-stratified AUC"),
    "defend": (cmd_defend, "paired undefended/defended experiment"),
    "sweep": (cmd_sweep, "grid over label fraction, alpha, beta or DP noise; CSV output"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphmi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (a previous report also works)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE")
        p.add_argument("--out", required=True)
        if name != "gen-sbm":
            p.add_argument("--graph", help="dataset directory (edges.txt, features.csv, labels.txt); "
                                           "defaults to the configured SBM")
        if name in ("attack", "sample", "influence"):
            p.add_argument("--checkpoint")
        if name in ("sample", "evaluate", "influence"):
            p.add_argument("--probs")
        if name in ("attack", "evaluate"):
            p.add_argument("--per-edge", action="store_true", help="include per-pair scores")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise ConfigError("a subcommand is required: " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = resolve_config(args.config, args.overrides, graph=getattr(args, "graph", None),
                             checkpoint=getattr(args, "checkpoint", None),
                             probs=getattr(args, "probs", None))
        return COMMANDS[args.command][0](copy.deepcopy(cfg), args)
    except ConfigError as exc:
        print(f"graphmi: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, TrainingError, AttackError, RuntimeError) as exc:
        print(f"graphmi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
