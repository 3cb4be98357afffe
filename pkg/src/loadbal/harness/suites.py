"""Invariant suites run by ``verify``. Each suite is a small, seeded, self-contained check."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import graph as G
from ..analysis import checks, couplings, oracles
from ..process import reconstruct_from_errors, run, run_standard_batch, step_standard
from ..rng import CounterStream, derive_seed, hash_key, hash_keys
from ..schedule import AsyncEdgeModel, CircuitModel, RandomMatchingModel
from ..spectral import (
    check_smoothing_matrix,
    is_doubly_stochastic,
    row_dist2,
    window_partners,
    window_product,
)
from ..tokens import TokenState


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


SUITES: dict[str, Callable[[], SuiteResult]] = {}


def suite(name: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper():
            passed, detail = fn()
            return SuiteResult(name, bool(passed), detail)
        SUITES[name] = wrapper
        return wrapper
    return deco


def _graphs():
    return [G.hypercube(3), G.cycle(5), G.path(4), G.torus(3, 4), G.complete(5), G.star(4),
            G.random_regular(12, 3, seed=7)]


def _models(g, seed=0):
    return [CircuitModel(g), RandomMatchingModel(g, seed), AsyncEdgeModel(g, seed)]


@suite("graph-io")
def _graph_io():
    bad = 0
    for g in _graphs():
        if G.load_graph(G.save_graph(g)) != g:
            bad += 1
        try:
            G.edge_color(g).validate(g)
        except G.GraphError:
            bad += 1
    return bad == 0, {"failures": bad}


@suite("rng")
def _rng():
    rs = np.arange(1, 50)
    vec = hash_keys(11, rs, 3, 1)
    scal = [hash_key(11, int(r), 3, 1) for r in rs]
    return [int(v) for v in vec] == scal, {"checked": len(rs)}


@suite("matchings")
def _matchings():
    bad = 0
    for g in _graphs():
        for m in _models(g):
            for t in range(1, 40):
                try:
                    m.matching(t).validate(g)
                except ValueError:
                    bad += 1
    return bad == 0, {"failures": bad}


@suite("doubly-stochastic")
def _stochastic():
    bad = 0
    for g in _graphs():
        for m in _models(g, 3):
            if not is_doubly_stochastic(window_product(m, 1, 60)):
                bad += 1
    return bad == 0, {"failures": bad}


@suite("row-norms")
def _row_norms():
    worst_id, worst_inc = 0.0, 0.0
    g = G.random_regular(32, 4, seed=1)
    for s in range(20):
        res = checks.row_norm_check(window_partners(RandomMatchingModel(g, s), 1, 200), g.n)
        worst_id = max(worst_id, res.identity_residual)
        worst_inc = max(worst_inc, res.max_increase)
    return worst_id < 1e-12 and worst_inc <= 1e-12, {"identity": worst_id, "increase": worst_inc}


@suite("smoothing-sufficient")
def _smoothing_sufficient():
    bad = 0
    g = G.cycle(8)
    for s in range(10):
        P = np.eye(g.n)
        for p in window_partners(RandomMatchingModel(g, s), 1, 300):
            P = 0.5 * (P + P[:, p])
            K, eps = 4.0, 0.5
            if np.all(row_dist2(P) <= (eps / (2 * K * g.n)) ** 2) and not check_smoothing_matrix(P, K, eps).passed:
                bad += 1
    return bad == 0, {"failures": bad}


@suite("standard-batch")
def _standard_batch():
    bad = 0
    g = G.torus(3, 3)
    m = RandomMatchingModel(g, 2)
    rng = np.random.default_rng(0)
    for k in range(20):
        x = rng.integers(0, 30, g.n)
        seed = derive_seed(5, k)
        y = x.copy()
        for t in range(1, 30):
            y, _ = step_standard(y, m.matching(t), CounterStream(seed), t)
        Y = run_standard_batch(m, x, 29, np.array([seed], dtype=np.uint64))
        bad += int(not np.array_equal(y, Y[0]))
    return bad == 0, {"failures": bad}


@suite("continuous-matrix")
def _continuous():
    worst = 0.0
    for g in _graphs():
        m = RandomMatchingModel(g, 4)
        x = np.arange(g.n, dtype=float) ** 2
        res = run("continuous", list(x), m, 25)
        worst = max(worst, float(np.abs(np.array(res.state) - x @ window_product(m, 1, 25)).max()))
    return worst <= 1e-9, {"max_abs_diff": worst}


@suite("conservation")
def _conservation():
    bad = 0
    for g in _graphs():
        for m in _models(g, 1):
            x = np.arange(g.n, dtype=np.int64) * 3
            X = run_standard_batch(m, x, 50, np.arange(5, dtype=np.uint64))
            bad += int(np.any(X.sum(axis=1) != x.sum()))
            st = TokenState.from_loads(x)
            run("height", st, m, 20, seed=3)
    return bad == 0, {"failures": bad}


@suite("rounding-errors")
def _rounding_errors():
    bad = 0
    rng = np.random.default_rng(1)
    for k in range(40):
        n = int(rng.integers(2, 9))
        g = G.complete(n)
        m = RandomMatchingModel(g, k)
        t = int(rng.integers(1, 20))
        x = rng.integers(0, 20, n)
        res = run("standard", x, m, t, seed=k)
        rec = reconstruct_from_errors(x, m, res.rounding, t, res.state)
        bad += int(not rec.equal)
    return bad == 0, {"failures": bad}


@suite("couplings")
def _couplings():
    bad = 0
    g = G.hypercube(4)
    rng = np.random.default_rng(2)
    for k, m in enumerate(_models(g, 9)):
        for s in range(10):
            x = rng.integers(0, 40, g.n)
            K = int(x.max()) + 3
            bad += int(not couplings.flip_identity_holds(x, K, m, 30, s))
            bad += int(not couplings.shift_identity_holds(x, 7, m, 30, s))
            bad += int(not couplings.domination_holds(x, x + rng.integers(0, 3, g.n), m, 30, s))
            bad += int(not couplings.gap_symmetry_holds(x, K, m, 30, s))
    return bad == 0, {"failures": bad}


@suite("height-monotone")
def _height():
    g = G.complete(6)
    st = TokenState.from_loads([9, 0, 3, 0, 5, 1])
    a = couplings.height_audit(st, AsyncEdgeModel(g, 1), 3000, seed=4)
    return a.passed, {"pair_steps": a.pair_steps, "height_violations": a.height_violations,
                      "y_violations": a.y_violations, "load_mismatches": a.load_mismatches}


@functools.lru_cache(maxsize=1)
def _family():
    return oracles.exhaustive_family(4, 3, 4)


@suite("na-oracle")
def _na():
    rep = _family()
    return rep.na_pass, rep.to_dict()


@suite("walk-law")
def _walk():
    rep = _family()
    return rep.walk_pass, rep.to_dict()


@suite("psi-identity")
def _psi():
    rng = np.random.default_rng(3)
    worst, b1, b2 = 0.0, True, True
    for k in range(100):
        n = int(rng.integers(2, 33))
        g = G.complete(n) if n < 4 else G.random_regular(n, 3 if n % 2 == 0 else 2, seed=k)
        a = rng.random(n)
        a /= a.sum()
        res = checks.psi_identity_check(a, window_partners(RandomMatchingModel(g, k), 1, 50))
        worst = max(worst, res.max_residual)
        b1 &= res.bound1_ok
        b2 &= res.bound2_ok
    return worst < 1e-10 and b1 and b2, {"max_residual": worst, "bound1": b1, "bound2": b2}


def run_suites(names: list[str] | None = None) -> list[SuiteResult]:
    chosen = list(SUITES) if not names else names
    unknown = [n for n in chosen if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {', '.join(unknown)}; valid: {', '.join(SUITES)}")
    return [SUITES[n]() for n in chosen]
