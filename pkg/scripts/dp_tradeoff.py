"""Utility and attack AUC of targets trained with clipped, noised gradients.

    python3 scripts/dp_tradeoff.py --sigmas 0 0.5 1 2 --out dp.csv
"""
import argparse

import numpy as np

from graphmi import AttackConfig, DpConfig, SbmSpec, TrainConfig, generate_sbm
from graphmi.pipeline import run_once
from graphmi.serialize import write_csv


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    p.add_argument("--clip", type=float, default=1.0)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out", default="dp.csv")
    args = p.parse_args()

    rows = []
    for sigma in args.sigmas:
        accs, aucs = [], []
        for s in range(args.seeds):
            dp = DpConfig(clip_norm=args.clip, noise_multiplier=sigma)
            r = run_once(generate_sbm(SbmSpec(seed=s)), TrainConfig(seed=s, dp=dp), AttackConfig(seed=s),
                         eval_seed=s, baselines=False)
            accs.append(r.val_accuracy)
            aucs.append(r.graphmi_auc)
        rows.append([sigma, args.clip, np.mean(accs), np.mean(aucs), np.std(aucs)])
        print(f"sigma {sigma:.2f}: val acc {np.mean(accs):.3f}, attack AUC {np.mean(aucs):.3f}")
    write_csv(args.out, ["sigma", "clip_norm", "val_acc_mean", "auc_mean", "auc_std"], rows)


if __name__ == "__main__":
    main()
