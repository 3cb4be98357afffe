"""Empirical tail of a weighted load sum after a smoothing prefix, next to its analytic bound."""
import argparse

import numpy as np

from loadbal.analysis.checks import hoeffding_check
from loadbal.graph import build_named
from loadbal.schedule import make_model
from loadbal.spectral import smoothing_prefix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", nargs="+", default=["hypercube", "d=6"])
    ap.add_argument("--model", default="circuit")
    ap.add_argument("--K", type=int, default=1024)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--support", type=int, nargs="+", default=[1, 4, 8, 32])
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()

    fam, *params = a.family
    g = build_named(fam, **{k: int(v) for k, v in (p.split("=") for p in params)})
    model = make_model(g, a.model, seed=a.seed)
    kappa = 1 / (2 * g.n)
    t = smoothing_prefix(model, a.K, kappa, 50 * g.n)
    if t is None:
        raise SystemExit("no smoothing prefix found")
    rng = np.random.default_rng(a.seed)
    x0 = rng.integers(0, a.K + 1, g.n)
    deltas = [0.5, 1, 1.5, 2, 3, 4]
    print(f"prefix {t} rounds, kappa={kappa:.4g}")
    print("support," + ",".join(f"emp@{d},bound@{d}" for d in deltas))
    for s in a.support:
        w = np.zeros(g.n)
        w[rng.choice(g.n, s, replace=False)] = 1 / s
        r = hoeffding_check(model, x0, t, w, kappa, deltas, a.trials, seed=a.seed + s, K=a.K)
        print(f"{s}," + ",".join(f"{e:.4f},{b:.4f}" for e, b in zip(r.empirical, r.bound)))


if __name__ == "__main__":
    main()
