"""Pseudo-edge defense: attack AUC on the original edges vs. number of added edges.

    python3 scripts/defense_sweep.py --fractions 0 0.1 0.25 0.5 0.75 --out defense.csv
"""
import argparse

import numpy as np

from graphmi import AttackConfig, DefenseConfig, SbmSpec, TrainConfig, generate_sbm
from graphmi.defense import defense_experiment, threshold_for_added
from graphmi.serialize import write_csv


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fractions", type=float, nargs="+", default=[0.0, 0.1, 0.25, 0.5, 0.75],
                   help="share of non-edges turned into pseudo edges")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out", default="defense.csv")
    args = p.parse_args()

    rows = []
    for frac in args.fractions:
        accs, aucs, added = [], [], []
        for s in range(args.seeds):
            g = generate_sbm(SbmSpec(seed=s))
            non_edges = g.num_nodes * (g.num_nodes - 1) // 2 - g.num_edges
            t = threshold_for_added(g.features, g.adjacency, int(round(frac * non_edges)))
            rep = defense_experiment(g, TrainConfig(seed=s), AttackConfig(seed=s), DefenseConfig(t), eval_seed=s)
            accs.append(rep.defended.utility_acc)
            aucs.append(rep.defended.attack_auc)
            added.append(rep.defended.num_added)
        rows.append([frac, np.mean(added), np.mean(accs), np.mean(aucs)])
        print(f"fraction {frac:.2f} (+{np.mean(added):.0f} edges): val acc {np.mean(accs):.3f}, "
              f"attack AUC {np.mean(aucs):.3f}")
    write_csv(args.out, ["fraction", "added_mean", "val_acc_mean", "auc_mean"], rows)


if __name__ == "__main__":
    main()
