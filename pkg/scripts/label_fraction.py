"""Attack AUC as the fraction of nodes with known labels shrinks.

    python3 scripts/label_fraction.py --fractions 1.0 0.8 0.5 0.2 0.1 --out label_fraction.csv
"""
import argparse

from graphmi.cli import SWEEP_HEADER, default_config, sweep_rows, get_graph
from graphmi.serialize import write_csv


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fractions", type=float, nargs="+", default=[1.0, 0.8, 0.5, 0.2, 0.1])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out", default="label_fraction.csv")
    args = p.parse_args()

    cfg = default_config()
    cfg["sweep"] = {"param": "label_fraction", "values": args.fractions, "seeds": list(range(args.seeds))}
    rows = sweep_rows(get_graph(cfg), cfg)
    write_csv(args.out, SWEEP_HEADER, rows)
    for r in rows:
        print(f"fraction {r[1]:.2f}: AUC {r[3]:.3f} +- {r[4]:.3f}, AP {r[5]:.3f}")


if __name__ == "__main__":
    main()
