"""Experiment configuration: JSON in, validated dataclasses out.

Every schema violation is collected before raising, so one pass reports all
of them.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..graph import FAMILIES, Graph, GraphError, build_named, load_graph

DEFAULT_TRIALS = 10
DEFAULT_CADENCE = 1
DEFAULT_MULTIPLIER = 8.0

MODEL_KINDS = ("circuit", "random_matching", "async", "replay")
INITIAL_KINDS = ("point", "two-block", "random-bounded", "explicit")
ROUNDS_KINDS = ("explicit", "tau_spectral", "staircase")
ENGINES = ("standard", "height", "continuous")

SCHEMA = {
    "graph": "{family: str, <family params>} | {file: path}",
    "model": "str kind | {kind, seed?, path? (replay)}",
    "initial": "{kind: point|two-block|random-bounded|explicit, K?, node?, seed?, loads?}",
    "K": "int >= disc(initial), optional",
    "rounds": "{kind: explicit, T} | {kind: tau_spectral, multiplier?, measure_rounds?} | {kind: staircase}",
    "engine": "standard | height | continuous",
    "trials": "int >= 1 (default 10)",
    "seed": "int (default 0)",
    "observers": "{cadence: int >= 1 (default 1), y_level: int?}",
    "output": "{dir: path}",
}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid config:\n  - " + "\n  - ".join(self.errors))


@dataclass
class GraphSpec:
    family: str | None = None
    params: dict = field(default_factory=dict)
    file: str | None = None

    def build(self, base: Path | None = None) -> Graph:
        if self.file is not None:
            p = Path(self.file)
            if base is not None and not p.is_absolute():
                p = base / p
            return load_graph(p.read_text())
        return build_named(self.family, **self.params)


@dataclass
class ModelSpec:
    kind: str
    seed: int = 0
    path: str | None = None


@dataclass
class InitialSpec:
    kind: str
    K: int | None = None
    node: int = 0
    seed: int = 0
    loads: list[int] | None = None

    def build(self, n: int) -> np.ndarray:
        if self.kind == "point":
            x = np.zeros(n, dtype=np.int64)
            x[self.node] = self.K
        elif self.kind == "two-block":
            x = np.zeros(n, dtype=np.int64)
            x[: (n + 1) // 2] = self.K
        elif self.kind == "random-bounded":
            x = np.random.default_rng(self.seed).integers(0, self.K + 1, size=n).astype(np.int64)
        else:
            x = np.asarray(self.loads, dtype=np.int64)
        return x


@dataclass
class RoundsSpec:
    kind: str = "tau_spectral"
    T: int | None = None
    multiplier: float = DEFAULT_MULTIPLIER
    measure_rounds: int | None = None


@dataclass
class ExperimentConfig:
    graph: GraphSpec
    model: ModelSpec
    initial: InitialSpec
    K: int | None = None
    rounds: RoundsSpec = field(default_factory=RoundsSpec)
    engine: str = "standard"
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    cadence: int = DEFAULT_CADENCE
    y_level: int | None = None
    out_dir: str | None = None
    base_dir: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)


def _int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_config(doc: Any, base_dir: str | None = None) -> ExperimentConfig:
    errs: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["config must be a JSON object"])
    known = set(SCHEMA)
    for k in doc:
        if k not in known:
            errs.append(f"unknown key {k!r}")

    # graph
    gs = None
    g = doc.get("graph")
    if not isinstance(g, dict):
        errs.append("graph: required object")
    elif "file" in g:
        gs = GraphSpec(file=str(g["file"]))
    else:
        fam = g.get("family")
        if fam not in FAMILIES:
            errs.append(f"graph.family: must be one of {', '.join(FAMILIES)}")
        else:
            params = {k: v for k, v in g.items() if k != "family"}
            bad = [k for k, v in params.items() if not _int(v)]
            if bad:
                errs.append(f"graph: parameters must be integers: {', '.join(bad)}")
            else:
                gs = GraphSpec(fam, params)

    # model
    ms = None
    m = doc.get("model")
    if isinstance(m, str):
        m = {"kind": m}
    if not isinstance(m, dict):
        errs.append("model: required (kind string or object)")
    else:
        kind = m.get("kind")
        if kind == "async_edge":
            kind = "async"
        if kind not in MODEL_KINDS:
            errs.append(f"model.kind: unknown {kind!r}; valid kinds: {', '.join(MODEL_KINDS)}")
        else:
            seed = m.get("seed", 0)
            if not _int(seed):
                errs.append("model.seed: must be an integer")
            if kind == "replay" and not isinstance(m.get("path"), str):
                errs.append("model.path: replay needs a schedule file path")
            ms = ModelSpec(kind, seed if _int(seed) else 0, m.get("path"))

    # initial
    ins = None
    i = doc.get("initial")
    if not isinstance(i, dict):
        errs.append("initial: required object")
    else:
        kind = i.get("kind")
        if kind not in INITIAL_KINDS:
            errs.append(f"initial.kind: must be one of {', '.join(INITIAL_KINDS)}")
        else:
            K = i.get("K")
            if kind == "explicit":
                loads = i.get("loads")
                if not isinstance(loads, list) or not all(_int(v) and v >= 0 for v in loads):
                    errs.append("initial.loads: list of non-negative integers required")
                else:
                    ins = InitialSpec(kind, loads=loads)
            else:
                if not _int(K):
                    errs.append("initial.K: integer required")
                elif K < 1:
                    errs.append("initial.K: K must be >= 1")
                node = i.get("node", 0)
                if not _int(node) or node < 0:
                    errs.append("initial.node: non-negative integer required")
                seed = i.get("seed", 0)
                if not _int(seed):
                    errs.append("initial.seed: integer required")
                if _int(K) and K >= 1 and _int(node) and node >= 0 and _int(seed):
                    ins = InitialSpec(kind, K=K, node=node, seed=seed)

    # rounds
    rs = RoundsSpec()
    r = doc.get("rounds", {"kind": "tau_spectral"})
    if isinstance(r, str):
        r = {"kind": r}
    if not isinstance(r, dict) or r.get("kind") not in ROUNDS_KINDS:
        errs.append(f"rounds.kind: must be one of {', '.join(ROUNDS_KINDS)}")
    else:
        rs = RoundsSpec(r["kind"])
        if rs.kind == "explicit":
            T = r.get("T")
            if not _int(T) or T < 0:
                errs.append("rounds.T: non-negative integer required")
            else:
                rs.T = T
        mult = r.get("multiplier", DEFAULT_MULTIPLIER)
        if not _num(mult) or mult <= 0:
            errs.append("rounds.multiplier: multiplier must be positive")
        else:
            rs.multiplier = float(mult)
        mr = r.get("measure_rounds")
        if mr is not None and (not _int(mr) or mr < 1):
            errs.append("rounds.measure_rounds: positive integer required")
        rs.measure_rounds = mr if _int(mr) else None

    engine = doc.get("engine", "standard")
    if engine not in ENGINES:
        errs.append(f"engine: must be one of {', '.join(ENGINES)}")
    trials = doc.get("trials", DEFAULT_TRIALS)
    if not _int(trials) or trials < 1:
        errs.append("trials: must be an integer >= 1")
    seed = doc.get("seed", 0)
    if not _int(seed):
        errs.append("seed: must be an integer")
    obs = doc.get("observers", {})
    cadence, y_level = DEFAULT_CADENCE, None
    if not isinstance(obs, dict):
        errs.append("observers: must be an object")
    else:
        cadence = obs.get("cadence", DEFAULT_CADENCE)
        if not _int(cadence) or cadence < 1:
            errs.append("observers.cadence: must be an integer >= 1")
        y_level = obs.get("y_level")
        if y_level is not None and (not _int(y_level) or y_level < 0):
            errs.append("observers.y_level: non-negative integer required")
    out = doc.get("output", {})
    out_dir = out.get("dir") if isinstance(out, dict) else None

    K = doc.get("K")
    if K is not None and (not _int(K) or K < 1):
        errs.append("K: K must be an integer >= 1")
    if engine == "height" and rs.kind == "staircase":
        errs.append("rounds.kind: staircase runs use the standard engine")
    if ms is not None and ms.kind == "replay" and rs.kind != "explicit":
        errs.append("rounds.kind: replay schedules need explicit T")

    # checks that need the graph
    if gs is not None and ins is not None and not errs:
        try:
            graph = gs.build(Path(base_dir) if base_dir else None)
        except (GraphError, OSError) as exc:
            errs.append(f"graph: {exc}")
        else:
            if ins.kind == "explicit" and len(ins.loads) != graph.n:
                errs.append(f"initial.loads: length {len(ins.loads)} != n = {graph.n}")
            if ins.kind == "point" and ins.node >= graph.n:
                errs.append(f"initial.node: {ins.node} >= n = {graph.n}")
            if not errs:
                x = ins.build(graph.n)
                d = int(x.max() - x.min())
                if K is not None and _int(K) and d > K:
                    errs.append(f"K: initial discrepancy {d} exceeds K = {K}")
                if int(x.sum()) >= 1 << 62:
                    errs.append("initial: total load must be < 2**62")
    if errs:
        raise ConfigError(errs)
    return ExperimentConfig(gs, ms, ins, K, rs, engine, trials, seed, cadence, y_level,
                            out_dir, base_dir, raw=copy.deepcopy(doc))


def load_config(text: str, base_dir: str | None = None) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from None
    return parse_config(doc, base_dir)


def set_dotted(doc: dict, path: str, value) -> dict:
    out = copy.deepcopy(doc)
    cur = out
    keys = path.split(".")
    for k in keys[:-1]:
        nxt = cur.get(k)
        if isinstance(nxt, str) and k == "model":
            nxt = {"kind": nxt}
        if not isinstance(nxt, dict):
            nxt = {}
        cur[k] = nxt
        cur = nxt
    cur[keys[-1]] = value
    return out
