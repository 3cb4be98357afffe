"""Undirected connected graphs, named families, edge-list I/O and edge colorings."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    """Infeasible construction parameters or a malformed graph."""


class GraphParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


Edge = tuple[int, int]


def _canon(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    max_degree: int = field(compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge], check_connected: bool = True) -> "Graph":
        if n < 1:
            raise GraphError("n must be >= 1")
        seen: set[Edge] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            e = _canon(u, v)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
        ordered = tuple(sorted(seen))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in ordered:
            adj[u].append(v)
            adj[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in adj)
        g = cls(n, ordered, adjacency, max((len(a) for a in adjacency), default=0))
        if check_connected and not g.is_connected():
            raise GraphError("graph is disconnected")
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        return _canon(u, v) in self.edge_index

    @property
    def edge_index(self) -> dict[Edge, int]:
        idx = self.__dict__.get("_edge_index")
        if idx is None:
            idx = {e: i for i, e in enumerate(self.edges)}
            object.__setattr__(self, "_edge_index", idx)
        return idx

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(offsets, neighbours) arrays of the sorted adjacency lists."""
        deg = self.degrees()
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=offsets[1:])
        nbrs = np.array([v for a in self.adjacency for v in a], dtype=np.int64)
        return offsets, nbrs

    def bfs_reach(self, source: int = 0) -> int:
        seen = [False] * self.n
        seen[source] = True
        queue = deque([source])
        count = 1
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    queue.append(v)
        return count

    def is_connected(self) -> bool:
        return self.bfs_reach(0) == self.n


# --- named families ------------------------------------------------------

def hypercube(d: int) -> Graph:
    if d < 1:
        raise GraphError("hypercube requires d >= 1")
    n = 1 << d
    edges = [(u, u ^ (1 << i)) for u in range(n) for i in range(d) if u < u ^ (1 << i)]
    return Graph.from_edges(n, edges)


def cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle requires n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    if n < 2:
        raise GraphError("path requires n >= 2")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def torus(a: int, b: int) -> Graph:
    if a < 3 or b < 3:
        raise GraphError("torus requires a >= 3 and b >= 3")
    edges = []
    for i in range(a):
        for j in range(b):
            u = i * b + j
            edges.append((u, i * b + (j + 1) % b))
            edges.append((u, ((i + 1) % a) * b + j))
    return Graph.from_edges(a * b, edges)


def complete(n: int) -> Graph:
    if n < 2:
        raise GraphError("complete requires n >= 2")
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def star(leaves: int) -> Graph:
    if leaves < 1:
        raise GraphError("star requires at least one leaf")
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


MAX_REGULAR_ATTEMPTS = 100


def _pair_stubs(n: int, d: int, rng: np.random.Generator) -> list[Edge] | None:
    """Pair stubs one edge at a time, redrawing pairs that would form a loop or
    multi-edge; None when the remaining stubs cannot be paired."""
    stubs = [u for u in range(n) for _ in range(d)]
    edges: set[Edge] = set()
    while stubs:
        k = len(stubs)
        for _ in range(50 * k):
            i, j = rng.integers(k, size=2)
            u, v = stubs[i], stubs[j]
            if u != v and _canon(u, v) not in edges:
                break
        else:
            return None
        edges.add(_canon(u, v))
        for idx in sorted((int(i), int(j)), reverse=True):
            stubs[idx] = stubs[-1]
            stubs.pop()
    return sorted(edges)


def random_regular(n: int, d: int, seed: int = 0) -> Graph:
    """Random d-regular simple graph by incremental stub pairing; disconnected draws are redrawn."""
    if d < 1:
        raise GraphError("random_regular requires d >= 1")
    if d >= n:
        raise GraphError("random_regular requires d < n")
    if (n * d) % 2:
        raise GraphError("random_regular requires n*d even")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REGULAR_ATTEMPTS):
        edges = _pair_stubs(n, d, rng)
        if edges is None:
            continue
        g = Graph.from_edges(n, edges, check_connected=False)
        if g.is_connected():
            return g
    raise GraphError(f"random_regular({n}, {d}) failed after {MAX_REGULAR_ATTEMPTS} attempts")


FAMILIES = {
    "hypercube": (hypercube, ("d",)),
    "cycle": (cycle, ("n",)),
    "path": (path, ("n",)),
    "torus": (torus, ("a", "b")),
    "complete": (complete, ("n",)),
    "star": (star, ("leaves",)),
    "random_regular": (random_regular, ("n", "d", "seed")),
}


def build_named(family: str, **params) -> Graph:
    if family not in FAMILIES:
        raise GraphError(f"unknown family {family!r}; valid: {', '.join(FAMILIES)}")
    fn, names = FAMILIES[family]
    missing = [p for p in names if p not in params and p != "seed"]
    if missing:
        raise GraphError(f"{family} requires parameter(s) {', '.join(missing)}")
    extra = set(params) - set(names)
    if extra:
        raise GraphError(f"{family} got unexpected parameter(s) {', '.join(sorted(extra))}")
    return fn(**{k: int(v) for k, v in params.items()})


# --- edge-list text format -----------------------------------------------

def load_graph(text: str) -> Graph:
    lines = [ln for ln in text.replace("\r\n", "\n").split("\n")]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise GraphParseError("empty document", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise GraphParseError("header must be 'n m'", 1)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphParseError("header must hold two integers", 1) from None
    if n < 1 or m < 0:
        raise GraphParseError("invalid n or m", 1)
    if len(lines) - 1 != m:
        raise GraphParseError(f"expected {m} edge lines, found {len(lines) - 1}", len(lines))
    seen: set[Edge] = set()
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise GraphParseError("edge line must be 'u v'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError("node ids must be integers", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"node id out of range [0, {n})", lineno)
        if u == v:
            raise GraphParseError("self-loop", lineno)
        e = _canon(u, v)
        if e in seen:
            raise GraphParseError(f"duplicate edge {e[0]} {e[1]}", lineno)
        seen.add(e)
    g = Graph.from_edges(n, seen, check_connected=False)
    if not g.is_connected():
        raise GraphParseError("graph is disconnected")
    return g


def save_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


# --- edge colorings ------------------------------------------------------

@dataclass(frozen=True)
class EdgeColoring:
    classes: tuple[tuple[Edge, ...], ...]

    @property
    def width(self) -> int:
        return len(self.classes)

    def validate(self, g: Graph) -> None:
        seen: set[Edge] = set()
        for c in self.classes:
            nodes: set[int] = set()
            for u, v in c:
                if u in nodes or v in nodes:
                    raise GraphError(f"class is not a matching at edge ({u}, {v})")
                nodes.update((u, v))
                if (u, v) in seen:
                    raise GraphError(f"edge ({u}, {v}) in two classes")
                seen.add((u, v))
        if seen != set(g.edges):
            raise GraphError("coloring does not cover the edge set exactly")


def _hypercube_dimension(g: Graph) -> int | None:
    n = g.n
    if n < 2 or n & (n - 1):
        return None
    d = n.bit_length() - 1
    if g.m != d * n // 2:
        return None
    for u, v in g.edges:
        x = u ^ v
        if x & (x - 1):
            return None
    return d


def edge_color(g: Graph) -> EdgeColoring:
    """Proper edge coloring.

    Hypercubes get the dimension-exchange coloring (class ``i`` = edges
    flipping bit ``i``); any other graph is colored greedily over edges in
    lexicographic order, using at most ``2*max_degree - 1`` classes.
    """
    d = _hypercube_dimension(g)
    if d is not None:
        classes = [tuple(e for e in g.edges if e[0] ^ e[1] == 1 << i) for i in range(d)]
        return EdgeColoring(tuple(classes))
    used: list[set[int]] = [set() for _ in range(g.n)]
    classes: list[list[Edge]] = []
    for u, v in g.edges:
        c = 0
        while c in used[u] or c in used[v]:
            c += 1
        if c == len(classes):
            classes.append([])
        classes[c].append((u, v))
        used[u].add(c)
        used[v].add(c)
    return EdgeColoring(tuple(tuple(c) for c in classes))
