"""How much slack is in the spectral round bound: final discrepancy vs the constant multiplier.

    python3 scripts/multiplier_scan.py --family torus a=8 b=8 --model circuit
"""
import argparse

import numpy as np

from loadbal.graph import build_named
from loadbal.process import run_standard_batch
from loadbal.rng import trial_seeds
from loadbal.schedule import make_model
from loadbal.spectral import spectral_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", nargs="+", default=["torus", "a=8", "b=8"])
    ap.add_argument("--model", default="circuit")
    ap.add_argument("--log2-k", type=int, default=12)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--multipliers", type=float, nargs="+",
                    default=[0.0625, 0.125, 0.25, 0.5, 1, 2, 4, 8])
    a = ap.parse_args()

    fam, *params = a.family
    g = build_named(fam, **{k: int(v) for k, v in (p.split("=") for p in params)})
    model = make_model(g, a.model, seed=a.seed)
    K = 2 ** a.log2_k
    x0 = np.zeros(g.n, dtype=np.int64)
    x0[0] = K
    seeds = trial_seeds(a.seed, a.trials)
    sched = seeds if model.randomized else None
    print(f"{fam} n={g.n} model={a.model} K={K}")
    print(f"{'mult':>8}{'rounds':>10}{'disc<=3':>10}{'median':>8}{'max':>6}")
    for mult in a.multipliers:
        T = spectral_report(model, K, mult).tau_spectral
        X = run_standard_batch(model, x0, T, seeds, schedule_seeds=sched)
        d = X.max(axis=1) - X.min(axis=1)
        print(f"{mult:>8g}{T:>10}{int((d <= 3).sum()):>10}{int(np.median(d)):>8}{int(d.max()):>6}")


if __name__ == "__main__":
    main()
