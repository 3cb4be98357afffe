"""Stage-by-stage measurement of the discrepancy staircase K -> O(n) tokens -> 38 -> 4 -> 3.

Round counts use natural logs and ``ell = ln n / ln ln n``::

    t0  = 3 tau_g ln(2Kn) / ln n
    t1  = t0 + 2 tau_g + 6 ell tau_l
    t2  = t1 + 2 tau_g + 6 ell tau_l
    tau = t2 + 2 tau_g + ceil(10/c) ell tau_l      (c = 2 delta, delta = 1/4)

Every stage is a pure measurement at a fixed round; nothing adapts to the
observed loads.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..process import run_standard_batch
from ..rng import trial_seeds
from ..schedule import AsyncEdgeModel, CircuitModel, RandomMatchingModel, ScheduleModel
from ..spectral import diffusion_matrix, goodness_windows, schedule_lambda, spectral_lambda

DEFAULT_DELTA = 0.25


def _ceil(v: float) -> int:
    # exact integers computed through logs land a hair above; do not round those up
    return math.ceil(v - 1e-9)


@dataclass(frozen=True)
class StaircasePlan:
    n: int
    K: float
    tau_global: int
    tau_local: int
    c: float = 2 * DEFAULT_DELTA

    @property
    def ell(self) -> float:
        return math.log(self.n) / math.log(math.log(self.n))

    @property
    def t0(self) -> int:
        return _ceil(3 * self.tau_global * math.log(2 * self.K * self.n) / math.log(self.n))

    @property
    def stride(self) -> int:
        return _ceil(2 * self.tau_global + 6 * self.ell * self.tau_local)

    @property
    def t_phase1(self) -> int:
        return self.t0 + _ceil(self.tau_global + self.ell * self.tau_local)

    @property
    def t1(self) -> int:
        return self.t0 + self.stride

    @property
    def t2(self) -> int:
        return self.t1 + self.stride

    @property
    def tau(self) -> int:
        return self.t2 + _ceil(2 * self.tau_global + _ceil(10 / self.c) * self.ell * self.tau_local)

    def stages(self) -> list[tuple[str, int, float]]:
        """(name, round, threshold) in round order."""
        n = self.n
        return [
            ("linear_tokens", self.t0, 16.0 * n),
            ("concentration", self.t0, math.sqrt(48 * math.log(n)) + 1),
            ("phase1_tokens", self.t_phase1, n / math.log(n)),
            ("max_above_ceil", self.t1, 18.0),
            ("disc_38", self.t1, 38.0),
            ("max_above_half", self.t2, 1.0),
            ("disc_4", self.t2, 4.0),
            ("disc_3", self.tau, 3.0),
        ]

    def to_dict(self) -> dict:
        return {"n": self.n, "K": self.K, "tau_global": self.tau_global, "tau_local": self.tau_local,
                "c": self.c, "ell": self.ell, "t0": self.t0, "t_phase1": self.t_phase1,
                "t1": self.t1, "t2": self.t2, "tau": self.tau}


def plan_for_model(model: ScheduleModel, K: float, p_min: float | None = None) -> StaircasePlan:
    g = model.graph
    if isinstance(model, CircuitModel):
        tg, tl = goodness_windows("circuit", g.n, model.period, schedule_lambda(model))
    elif isinstance(model, (RandomMatchingModel, AsyncEdgeModel)):
        lam = spectral_lambda(diffusion_matrix(g))
        p = p_min if p_min is not None else model.p_min()
        tg, tl = goodness_windows(model.kind, g.n, g.max_degree, lam, p)
    else:
        raise ValueError(f"no staircase plan for {model.kind} schedules")
    return StaircasePlan(g.n, K, tg, tl)


def stage_observation(name: str, x: np.ndarray) -> float:
    """Observed quantity of a stage on one load vector (exact where rational)."""
    x = np.asarray(x, dtype=np.int64)
    n, tot = len(x), int(x.sum())
    ceil_mean = -(-tot // n)
    if name == "linear_tokens":
        return float(Fraction(int(np.clip(n * x - tot, 0, None).sum()), n))
    if name in ("concentration", "disc_38", "disc_4", "disc_3"):
        return float(x.max() - x.min())
    if name == "phase1_tokens":
        return float(np.clip(x - ceil_mean - 17, 0, None).sum())
    if name == "max_above_ceil":
        return float(x.max() - ceil_mean)
    if name == "max_above_half":
        # ceil(mean + 1/2) = ceil((2 tot + n) / (2n))
        return float(x.max() - (-(-(2 * tot + n) // (2 * n))))
    raise ValueError(f"unknown stage {name!r}")


@dataclass(frozen=True)
class StageVerdict:
    stage: str
    round: int
    threshold: float
    observed: float

    @property
    def passed(self) -> bool:
        return self.observed <= self.threshold


@dataclass
class StaircaseReport:
    plan: StaircasePlan
    trials: list[list[StageVerdict]] = field(default_factory=list)
    final_disc: list[int] = field(default_factory=list)

    def pass_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for rows in self.trials:
            for v in rows:
                out[v.stage] = out.get(v.stage, 0) + int(v.passed)
        return out

    def to_csv(self, trial: int = 0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "round", "threshold", "observed", "pass"])
        for v in self.trials[trial]:
            w.writerow([v.stage, v.round, repr(v.threshold), repr(v.observed), str(v.passed).lower()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"plan": self.plan.to_dict(), "pass_counts": self.pass_counts(),
                "trials": len(self.trials), "final_disc": self.final_disc}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def staircase_report(model: ScheduleModel, x0, K: float, trials: int = 1, seed: int = 0,
                     plan: StaircasePlan | None = None, independent_schedules: bool = True,
                     p_min: float | None = None) -> StaircaseReport:
    """Run the standard process up to the final stage and score every stage per trial."""
    x0 = np.asarray(x0, dtype=np.int64)
    if int(x0.max() - x0.min()) > K:
        raise ValueError("initial discrepancy exceeds K")
    plan = plan_for_model(model, K, p_min) if plan is None else plan
    stages = plan.stages()
    seeds = trial_seeds(seed, trials)
    sched = seeds if (independent_schedules and model.randomized) else None
    rows: list[list[StageVerdict]] = [[] for _ in range(trials)]
    by_round: dict[int, list[tuple[str, float]]] = {}
    for name, r, thr in stages:
        by_round.setdefault(r, []).append((name, thr))

    def observe(t, X):
        for name, thr in by_round.get(t, []):
            for k in range(trials):
                rows[k].append(StageVerdict(name, t, thr, stage_observation(name, X[k])))

    X = run_standard_batch(model, x0, plan.tau, seeds, schedule_seeds=sched,
                           observe=observe, observe_rounds=by_round.keys())
    order = {name: i for i, (name, _, _) in enumerate(stages)}
    for r in rows:
        r.sort(key=lambda v: order[v.stage])
    return StaircaseReport(plan, rows, [int(d) for d in X.max(axis=1) - X.min(axis=1)])
