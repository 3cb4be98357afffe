"""Experiment orchestration: config -> trials -> summary.json, trace.jsonl, stages.csv.

Trials are split into contiguous chunks (``BAL_THREADS`` workers); every trial
depends only on its own derived seed, so outputs are byte-identical for any
thread count. Wall-clock time goes to ``timing.json`` to keep the summary
reproducible.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..graph import Graph
from ..process import run_height_batch, run_standard_batch
from ..rng import trial_seeds
from ..schedule import ReplayModel, ScheduleModel, make_model
from ..spectral import spectral_report
from ..tokens import TokenState
from ..analysis.staircase import StaircasePlan, plan_for_model, stage_observation
from .config import ExperimentConfig, parse_config, set_dotted


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("BAL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class Prepared:
    graph: Graph
    model: ScheduleModel
    x0: np.ndarray
    K: int
    T: int
    plan: StaircasePlan | None = None
    spectral: dict | None = None

    def model_for(self, seed: int) -> ScheduleModel:
        if not self.model.randomized:
            return self.model
        return make_model(self.graph, self.model.kind, seed=seed)


def build_model(cfg: ExperimentConfig) -> tuple[ScheduleModel, np.ndarray, int]:
    """Schedule model, initial loads and K (defaults to the initial discrepancy)."""
    base = Path(cfg.base_dir) if cfg.base_dir else None
    graph = cfg.graph.build(base)
    if cfg.model.kind == "replay":
        p = Path(cfg.model.path)
        if base is not None and not p.is_absolute():
            p = base / p
        model: ScheduleModel = ReplayModel.from_json(graph, p.read_text())
    else:
        model = make_model(graph, cfg.model.kind, seed=cfg.model.seed)
    x0 = cfg.initial.build(graph.n)
    K = cfg.K if cfg.K is not None else max(1, int(x0.max() - x0.min()))
    return model, x0, K


def prepare(cfg: ExperimentConfig) -> Prepared:
    model, x0, K = build_model(cfg)
    graph = model.graph
    plan = spec = None
    if cfg.rounds.kind == "explicit":
        T = cfg.rounds.T
        if isinstance(model, ReplayModel) and T > len(model):
            raise ValueError(f"replay schedule holds {len(model)} rounds, T = {T}")
    elif cfg.rounds.kind == "tau_spectral":
        rep = spectral_report(model, K, cfg.rounds.multiplier, cfg.rounds.measure_rounds)
        T = rep.tau_spectral
        spec = {k: v for k, v in rep.to_dict().items() if k != "diffusion_p"}
    else:
        plan = plan_for_model(model, K)
        T = plan.tau
    return Prepared(graph, model, x0, K, T, plan, spec)


def observed_rounds(T: int, cadence: int, plan: StaircasePlan | None) -> list[int]:
    if plan is not None:
        return sorted({0, T} | {r for _, r, _ in plan.stages()})
    return sorted(set(range(0, T + 1, cadence)) | {T})


def _record(t: int, x: np.ndarray, y_level: int | None) -> dict:
    x = np.asarray(x)
    if np.issubdtype(x.dtype, np.integer):
        n, tot = len(x), int(x.sum())
        above = float(Fraction(int(np.clip(n * x - tot, 0, None).sum()), n))
        rec = {"round": t, "disc": int(x.max() - x.min()), "max": int(x.max()), "min": int(x.min()),
               "above_avg": above}
        if y_level is not None:
            rec["y_count"] = int(np.clip(x - y_level, 0, None).sum())
    else:
        mean = float(x.mean())
        rec = {"round": t, "disc": float(x.max() - x.min()), "max": float(x.max()),
               "min": float(x.min()), "above_avg": float(np.clip(x - mean, 0, None).sum())}
    return rec


@dataclass
class TrialResult:
    records: list[dict]
    final: np.ndarray
    stages: list[tuple] = field(default_factory=list)
    y_monotone: bool = True


def _run_chunk(cfg: ExperimentConfig, prep: Prepared, seeds: np.ndarray) -> list[TrialResult]:
    T = prep.T
    want = observed_rounds(T, cadence=cfg.cadence, plan=prep.plan)
    wanted = set(want)
    B = len(seeds)
    out = [TrialResult([], None) for _ in range(B)]
    stage_rounds: dict[int, list] = {}
    if prep.plan is not None:
        for name, r, thr in prep.plan.stages():
            stage_rounds.setdefault(r, []).append((name, thr))

    if cfg.engine == "standard":
        def observe(t, X):
            for k in range(B):
                out[k].records.append(_record(t, X[k], cfg.y_level))
                for name, thr in stage_rounds.get(t, []):
                    obs = stage_observation(name, X[k])
                    out[k].stages.append((name, t, thr, obs, obs <= thr))

        sched = seeds if prep.model.randomized else None
        X = run_standard_batch(prep.model, prep.x0, T, seeds, schedule_seeds=sched,
                               observe=observe, observe_rounds=wanted)
        for k in range(B):
            out[k].final = X[k]
    elif cfg.engine == "height":
        for k, s in enumerate(seeds):
            model = prep.model_for(int(s))
            state = TokenState.from_loads(prep.x0)
            level = cfg.y_level if cfg.y_level is not None else 0
            prev = [None]

            def observe(t, st, k=k, level=level, prev=prev):
                y = st.count_above(level)
                if prev[0] is not None and y > prev[0]:
                    out[k].y_monotone = False
                prev[0] = y
                if t in wanted:
                    out[k].records.append(_record(t, st.loads(), cfg.y_level))

            run_height_batch(state, model, T, int(s), observe=observe)
            out[k].final = state.loads()
    else:
        X = np.array(np.broadcast_to(prep.x0.astype(float), (B, prep.graph.n)))
        shared = not prep.model.randomized

        def rec_all(t):
            for k in range(B):
                out[k].records.append(_record(t, X[k], None))

        if 0 in wanted:
            rec_all(0)
        for t in range(1, T + 1):
            p = prep.model.partners(np.array([t])) if shared else prep.model.partners(np.full(B, t), seeds)
            p = np.broadcast_to(p, (B, prep.graph.n))
            X = 0.5 * (X + np.take_along_axis(X, p, axis=1))
            if t in wanted:
                rec_all(t)
        for k in range(B):
            out[k].final = X[k]
    return out


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    """Returns {"summary", "trace", "stages_csv", "timing"} (strings / dict)."""
    t_start = time.perf_counter()
    prep = prepare(cfg)
    seeds = trial_seeds(cfg.seed, cfg.trials)
    threads = thread_count() if threads is None else threads
    chunks = [c for c in np.array_split(seeds, min(threads, cfg.trials)) if len(c)]
    if len(chunks) == 1:
        results = _run_chunk(cfg, prep, chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            parts = list(ex.map(lambda c: _run_chunk(cfg, prep, c), chunks))
        results = [r for part in parts for r in part]

    finals = [r.final for r in results]
    integer = cfg.engine != "continuous"
    fd = [int(f.max() - f.min()) if integer else float(f.max() - f.min()) for f in finals]
    q = np.quantile(np.asarray(fd, dtype=float), [0, 0.25, 0.5, 0.75, 1.0])
    rounds = [rec["round"] for rec in results[0].records]
    curves = {
        "round": rounds,
        "disc_mean": [float(np.mean([r.records[i]["disc"] for r in results])) for i in range(len(rounds))],
        "disc_max": [float(np.max([r.records[i]["disc"] for r in results])) for i in range(len(rounds))],
    }
    summary = {
        "config": cfg.to_dict(),
        "n": prep.graph.n,
        "K": prep.K,
        "rounds": prep.T,
        "engine": cfg.engine,
        "model": prep.model.describe(),
        "trials": cfg.trials,
        "final_disc": fd,
        "quantiles": dict(zip(["min", "q25", "median", "q75", "max"], [float(v) for v in q])),
        "curves": curves,
    }
    if prep.spectral is not None:
        summary["spectral"] = prep.spectral
    if prep.plan is not None:
        counts: dict[str, int] = {}
        for r in results:
            for name, _, _, _, ok in r.stages:
                counts[name] = counts.get(name, 0) + int(ok)
        summary["stages"] = {"plan": prep.plan.to_dict(), "pass_counts": counts}
    if cfg.engine == "height":
        summary["y_monotone"] = all(r.y_monotone for r in results)

    lines = []
    for k, r in enumerate(results):
        for rec in r.records:
            lines.append(json.dumps({"trial": k, **rec}, sort_keys=False))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "stage", "round", "threshold", "observed", "pass"])
    for k, r in enumerate(results):
        for name, t, thr, obs, ok in r.stages:
            w.writerow([k, name, t, repr(float(thr)), repr(float(obs)), str(ok).lower()])
    return {
        "summary": json.dumps(summary, indent=2, sort_keys=True) + "\n",
        "trace": "\n".join(lines) + ("\n" if lines else ""),
        "stages_csv": buf.getvalue() if prep.plan is not None else None,
        "timing": {"wall_clock_seconds": time.perf_counter() - t_start, "threads": len(chunks)},
        "summary_obj": summary,
    }


def write_outputs(result: dict, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(result["summary"])
    (out / "trace.jsonl").write_text(result["trace"])
    if result["stages_csv"] is not None:
        (out / "stages.csv").write_text(result["stages_csv"])
    (out / "timing.json").write_text(json.dumps(result["timing"], indent=2) + "\n")
    return out


def expand_sweep(doc: dict) -> list[tuple[dict, dict]]:
    """[(overrides, config document)] for the cartesian product of the grid."""
    if not isinstance(doc, dict) or "base" not in doc or "grid" not in doc:
        raise ValueError("sweep config needs 'base' and 'grid'")
    grid = doc["grid"]
    if not isinstance(grid, dict) or not all(isinstance(v, list) and v for v in grid.values()):
        raise ValueError("grid must map dotted paths to non-empty lists")
    keys = sorted(grid)
    runs = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        d = doc["base"]
        for k, v in zip(keys, combo):
            d = set_dotted(d, k, v)
        runs.append((dict(zip(keys, combo)), d))
    return runs


def run_sweep(doc: dict, out_dir: str | Path, base_dir: str | None = None,
              overrides: dict | None = None) -> dict:
    out = Path(out_dir)
    index = []
    for i, (ov, d) in enumerate(expand_sweep(doc)):
        for k, v in (overrides or {}).items():
            d = set_dotted(d, k, v)
        cfg = parse_config(d, base_dir)
        res = run_experiment(cfg)
        write_outputs(res, out / f"run_{i:03d}")
        s = res["summary_obj"]
        index.append({"index": i, "overrides": ov, "rounds": s["rounds"],
                      "final_disc_median": s["quantiles"]["median"],
                      "final_disc_max": s["quantiles"]["max"]})
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps({"runs": index}, indent=2, sort_keys=True) + "\n")
    return {"runs": index}
