"""Per-stage pass counts of the discrepancy staircase on a hypercube balancing circuit.

    python3 scripts/staircase_table.py --dim 8 --trials 100 --csv stages.csv
"""
import argparse
import csv
import time

import numpy as np

from loadbal.analysis.staircase import staircase_report
from loadbal.graph import hypercube
from loadbal.schedule import CircuitModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--log2-k", type=int, default=16)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--csv")
    a = ap.parse_args()

    g = hypercube(a.dim)
    K = 2 ** a.log2_k
    x0 = np.zeros(g.n, dtype=np.int64)
    x0[0] = K
    t = time.perf_counter()
    rep = staircase_report(CircuitModel(g), x0, K, trials=a.trials, seed=a.seed)
    secs = time.perf_counter() - t

    counts = rep.pass_counts()
    print(f"n={g.n} K={K} tau={rep.plan.tau} ({secs:.1f}s)")
    print(f"{'stage':<16}{'round':>8}{'threshold':>12}{'pass':>8}{'worst':>10}")
    for name, rnd, thr in rep.plan.stages():
        worst = max(v.observed for row in rep.trials for v in row if v.stage == name)
        print(f"{name:<16}{rnd:>8}{thr:>12.2f}{counts[name]:>8}{worst:>10.2f}")
    vals, cnt = np.unique(rep.final_disc, return_counts=True)
    print("final disc:", dict(zip(vals.tolist(), cnt.tolist())))

    if a.csv:
        with open(a.csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["trial", "stage", "round", "threshold", "observed", "pass"])
            for k, row in enumerate(rep.trials):
                for v in row:
                    w.writerow([k, v.stage, v.round, v.threshold, v.observed, v.passed])


if __name__ == "__main__":
    main()
