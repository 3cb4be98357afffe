"""Matching schedules: balancing circuit, random matching, asynchronous edge, replay.

A matching is handled in two interchangeable forms: a :class:`Matching` (the
set of pairs ``[u:v]`` with ``u < v``) and a *partner array* ``p`` with
``p[u] = v`` for matched nodes and ``p[u] = u`` otherwise. Batched runs use
partner arrays of shape ``(trials, n)``.

Randomised schedules are counter-based: round ``t`` of the schedule with seed
``s`` is a pure function of ``(s, t)``, so ``matching(t)`` needs no state and
independent trials can be generated side by side.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .graph import EdgeColoring, Graph, edge_color
from .rng import TAG_EDGE, TAG_PROPOSE, hash_keys, to_unit


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Matching:
    round: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for u, v in self.pairs:
            if not u < v:
                raise ScheduleError(f"pair ({u}, {v}) must satisfy u < v")
            if u in seen or v in seen:
                raise ScheduleError(f"node appears in two pairs at ({u}, {v})")
            seen.update((u, v))

    def partners(self, n: int) -> np.ndarray:
        p = np.arange(n, dtype=np.int64)
        for u, v in self.pairs:
            if v >= n:
                raise ScheduleError(f"matching references node {v} >= n={n}")
            p[u], p[v] = v, u
        return p

    def validate(self, g: Graph) -> None:
        for u, v in self.pairs:
            if not g.has_edge(u, v):
                raise ScheduleError(f"({u}, {v}) is not an edge of the graph")


def matching_from_partners(rnd: int, partner: np.ndarray) -> Matching:
    idx = np.flatnonzero(partner > np.arange(len(partner)))
    return Matching(rnd, tuple((int(u), int(partner[u])) for u in idx))


class ScheduleModel:
    """Base class. ``matching(t)`` is pure; ``next_matching()`` walks t = 1, 2, ..."""

    kind: str = ""
    randomized: bool = False

    def __init__(self, graph: Graph, seed: int = 0):
        self.graph = graph
        self.seed = int(seed)
        self._cursor = 0

    @property
    def n(self) -> int:
        return self.graph.n

    def partners(self, rnd, seeds=None) -> np.ndarray:
        """Partner arrays; ``rnd`` and ``seeds`` broadcast to a leading batch axis.

        Returns shape ``(B, n)`` where ``B`` is the broadcast size of the two
        arguments (``seeds=None`` uses the model's own seed).
        """
        raise NotImplementedError

    def matching(self, t: int, seed: int | None = None) -> Matching:
        if t < 1:
            raise ScheduleError("rounds are numbered from 1")
        s = self.seed if seed is None else seed
        p = self.partners(np.array([t]), np.array([s], dtype=np.uint64))[0]
        return matching_from_partners(t, p)

    def next_matching(self) -> Matching:
        self._cursor += 1
        return self.matching(self._cursor)

    def reset(self) -> None:
        self._cursor = 0

    def matchings(self, t1: int, t2: int, seed: int | None = None) -> list[Matching]:
        return [self.matching(t, seed) for t in range(t1, t2 + 1)]

    def edge_probability(self, u: int, v: int) -> float:
        raise ScheduleError(f"{self.kind} schedule has no per-edge inclusion probability")

    def p_min(self) -> float:
        return min(self.edge_probability(u, v) for u, v in self.graph.edges)

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}


def _batch_shape(rnd, seeds):
    r = np.atleast_1d(np.asarray(rnd, dtype=np.int64)).reshape(-1, 1)
    s = np.atleast_1d(np.asarray(seeds, dtype=np.uint64)).reshape(-1, 1)
    B = np.broadcast_shapes(r.shape, s.shape)[0]
    return r, s, B


class CircuitModel(ScheduleModel):
    """Periodic sequence of the coloring classes: round t uses class (t-1) mod width."""

    kind = "circuit"

    def __init__(self, graph: Graph, coloring: EdgeColoring | None = None):
        super().__init__(graph, 0)
        self.coloring = coloring if coloring is not None else edge_color(graph)
        self.coloring.validate(graph)
        self._table = np.stack([
            Matching(0, tuple(sorted(c))).partners(graph.n) for c in self.coloring.classes
        ])

    @property
    def period(self) -> int:
        return self.coloring.width

    def partners(self, rnd, seeds=None) -> np.ndarray:
        r = np.atleast_1d(np.asarray(rnd, dtype=np.int64))
        rows = self._table[(r - 1) % self.period]
        if seeds is not None:
            B = np.broadcast_shapes(r.reshape(-1, 1).shape,
                                    np.atleast_1d(np.asarray(seeds)).reshape(-1, 1).shape)[0]
            if rows.shape[0] != B:
                rows = np.broadcast_to(rows, (B, self.n))
        return rows

    def describe(self) -> dict:
        return {"kind": self.kind, "period": self.period}


class RandomMatchingModel(ScheduleModel):
    """Every node proposes to a uniform neighbour; mutual proposals are matched.

    Edge ``{u, v}`` is included with probability ``1/(deg(u) deg(v))``
    independently across rounds.
    """

    kind = "random_matching"
    randomized = True

    def __init__(self, graph: Graph, seed: int = 0):
        super().__init__(graph, seed)
        self._offsets, self._nbrs = graph.csr()
        self._deg = graph.degrees()
        self._idx = np.arange(graph.n, dtype=np.int64)

    def partners(self, rnd, seeds=None) -> np.ndarray:
        r, s, B = _batch_shape(rnd, self.seed if seeds is None else seeds)
        h = hash_keys(s, r, self._idx[None, :], TAG_PROPOSE)
        choice = np.minimum((to_unit(h) * self._deg).astype(np.int64), self._deg - 1)
        prop = self._nbrs[self._offsets[:-1] + choice]
        back = np.take_along_axis(prop, prop, axis=1)
        return np.where(back == self._idx, prop, self._idx)

    def edge_probability(self, u: int, v: int) -> float:
        return 1.0 / (self.graph.degree(u) * self.graph.degree(v))

    def edge_probability_exact(self, u: int, v: int) -> Fraction:
        return Fraction(1, self.graph.degree(u) * self.graph.degree(v))


class AsyncEdgeModel(ScheduleModel):
    """One uniformly random edge per round."""

    kind = "async"
    randomized = True

    def __init__(self, graph: Graph, seed: int = 0):
        super().__init__(graph, seed)
        e = np.array(graph.edges, dtype=np.int64).reshape(-1, 2)
        self._eu, self._ev = e[:, 0], e[:, 1]
        self._idx = np.arange(graph.n, dtype=np.int64)

    def partners(self, rnd, seeds=None) -> np.ndarray:
        r, s, B = _batch_shape(rnd, self.seed if seeds is None else seeds)
        h = hash_keys(s, r, 0, TAG_EDGE)[:, 0]
        m = len(self._eu)
        e = np.minimum((to_unit(h) * m).astype(np.int64), m - 1)
        p = np.tile(self._idx, (B, 1))
        rows = np.arange(B)
        p[rows, self._eu[e]] = self._ev[e]
        p[rows, self._ev[e]] = self._eu[e]
        return p

    def edge_probability(self, u: int, v: int) -> float:
        return 1.0 / self.graph.m

    def edge_probability_exact(self, u: int, v: int) -> Fraction:
        return Fraction(1, self.graph.m)


class ReplayModel(ScheduleModel):
    """A stored, finite list of matchings (round t uses entry t-1)."""

    kind = "replay"

    def __init__(self, graph: Graph, rounds: Sequence[Iterable[Sequence[int]]], validate: bool = True):
        super().__init__(graph, 0)
        self.rounds: list[Matching] = []
        for t, pairs in enumerate(rounds, start=1):
            m = Matching(t, tuple(sorted((min(u, v), max(u, v)) for u, v in pairs)))
            if validate:
                m.validate(graph)
            self.rounds.append(m)
        self._table = np.stack([m.partners(graph.n) for m in self.rounds]) if self.rounds \
            else np.zeros((0, graph.n), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.rounds)

    def partners(self, rnd, seeds=None) -> np.ndarray:
        r = np.atleast_1d(np.asarray(rnd, dtype=np.int64))
        if np.any(r < 1) or np.any(r > len(self.rounds)):
            raise ScheduleError(f"replay schedule holds rounds 1..{len(self.rounds)}")
        rows = self._table[r - 1]
        if seeds is not None:
            B = np.atleast_1d(np.asarray(seeds)).size
            if rows.shape[0] != B:
                rows = np.broadcast_to(rows, (B, self.n))
        return rows

    def to_json(self) -> str:
        return json.dumps([[list(p) for p in m.pairs] for m in self.rounds])

    @classmethod
    def from_json(cls, graph: Graph, text: str) -> "ReplayModel":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ScheduleError("replay schedule must be a JSON array of rounds")
        return cls(graph, data)

    def describe(self) -> dict:
        return {"kind": self.kind, "rounds": len(self.rounds)}


def record(model: ScheduleModel, t1: int, t2: int, seed: int | None = None) -> ReplayModel:
    """Freeze rounds t1..t2 of ``model`` into a replay schedule."""
    ms = model.matchings(t1, t2, seed)
    return ReplayModel(model.graph, [m.pairs for m in ms], validate=False)


def measure_p_min(model: ScheduleModel, rounds: int, chunk: int = 4096) -> dict[tuple[int, int], float]:
    """Empirical per-edge inclusion frequencies over rounds 1..rounds."""
    if not model.randomized:
        raise ScheduleError(f"measure_p_min needs a randomized schedule, got {model.kind}")
    g = model.graph
    counts = np.zeros(g.m, dtype=np.int64)
    lo_codes = np.array([u * g.n + v for u, v in g.edges], dtype=np.int64)
    order = np.argsort(lo_codes)
    idx = np.arange(g.n)
    for start in range(1, rounds + 1, chunk):
        r = np.arange(start, min(start + chunk, rounds + 1))
        p = model.partners(r)
        mask = p > idx
        codes = (idx[None, :] * g.n + p)[mask]
        pos = np.searchsorted(lo_codes[order], codes)
        np.add.at(counts, order[pos], 1)
    return {e: counts[i] / rounds for i, e in enumerate(g.edges)}


def make_model(graph: Graph, kind: str, seed: int = 0, coloring: EdgeColoring | None = None,
               rounds=None) -> ScheduleModel:
    if kind == "circuit":
        return CircuitModel(graph, coloring)
    if kind == "random_matching":
        return RandomMatchingModel(graph, seed)
    if kind in ("async", "async_edge"):
        return AsyncEdgeModel(graph, seed)
    if kind == "replay":
        return ReplayModel(graph, rounds or [])
    raise ScheduleError(f"unknown model kind {kind!r}; valid: circuit, random_matching, async, replay")
