"""Exhaustive small-instance oracles for the height-sensitive process.

For a fixed matching sequence every shuffle/excess bit is enumerated, giving
the exact law of the final token locations as integer weights over a common
power-of-two denominator. Two properties are checked against exact window
products:

* negative association: ``Pr[all tokens of B end in D] <= prod_i M_{w_i, D}``
* single-token walk law: ``Pr[W_i = v] = M_{w_i, v}``
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ..exact import exact_window
from ..graph import Graph
from ..tokens import TokenState, apply_pair

BIT_BUDGET = 24
MAX_OUTCOMES = 1 << BIT_BUDGET


class OracleBudgetError(ValueError):
    pass


Round = tuple[tuple[int, int], ...]


def _as_rounds(seq) -> list[Round]:
    """Accept a list of single edges ``(u, v)`` or a list of pair lists."""
    out = []
    for r in seq:
        if len(r) == 2 and all(isinstance(z, (int, np.integer)) for z in r):
            u, v = int(r[0]), int(r[1])
            out.append(((min(u, v), max(u, v)),))
        else:
            out.append(tuple((min(int(u), int(v)), max(int(u), int(v))) for u, v in r))
    return out


def _partner_rows(rounds: Sequence[Round], n: int) -> list[np.ndarray]:
    rows = []
    for r in rounds:
        p = np.arange(n)
        for u, v in r:
            p[u], p[v] = v, u
        rows.append(p)
    return rows


def bit_bound(rounds: Sequence[Round], num_tokens: int) -> int:
    """Upper bound on random bits per path: ceil(s/2) per pair, s <= |T| per round."""
    return len(rounds) * ((num_tokens + 1) // 2)


def enumerate_final(stacks0: Sequence[Sequence[int]], rounds: Sequence[Round],
                    max_outcomes: int = MAX_OUTCOMES) -> tuple[dict, int]:
    """Exact law of the final stacks: ``{stacks: weight}`` with denominator ``2**S``."""
    states = {tuple(tuple(s) for s in stacks0): 1}
    S = 0
    generated = 0
    for r in rounds:
        sizes = {st: [(len(st[u]) + len(st[v]) + 1) // 2 for u, v in r] for st in states}
        cmax = max(sum(c) for c in sizes.values())
        new: dict = {}
        for st, w in states.items():
            cs = sizes[st]
            ctot = sum(cs)
            generated += 1 << ctot
            if generated > max_outcomes:
                raise OracleBudgetError(f"enumeration exceeds the 2^{BIT_BUDGET} outcome budget")
            scale = w << (cmax - ctot)
            for combo in range(1 << ctot):
                stacks = [list(s) for s in st]
                pos = 0
                for (u, v), c in zip(r, cs):
                    s = len(stacks[u]) + len(stacks[v])
                    half = s // 2
                    bits = [(combo >> (pos + j)) & 1 for j in range(c)]
                    apply_pair(stacks, u, v, bits[:half], bool(bits[half]) if s & 1 else False)
                    pos += c
                key = tuple(tuple(s) for s in stacks)
                new[key] = new.get(key, 0) + scale
        states = new
        S += cmax
    return states, S


def location_law(stacks0, rounds, max_outcomes: int = MAX_OUTCOMES):
    """(tokens, start nodes, [(final node per token, weight)], S)."""
    tokens = sorted(t for s in stacks0 for t in s)
    start = {t: u for u, s in enumerate(stacks0) for t in s}
    final, S = enumerate_final(stacks0, rounds, max_outcomes)
    pos = {t: i for i, t in enumerate(tokens)}
    outcomes = []
    for st, w in final.items():
        locs = [0] * len(tokens)
        for u, s in enumerate(st):
            for t in s:
                locs[pos[t]] = u
        outcomes.append((tuple(locs), w))
    return tokens, [start[t] for t in tokens], outcomes, S


# --- single-instance oracles ---------------------------------------------

@dataclass
class OracleInstance:
    graph: Graph
    rounds: list
    state: TokenState
    B: frozenset = frozenset()
    D: frozenset = frozenset()

    def __post_init__(self):
        self.rounds = _as_rounds(self.rounds)
        for r in self.rounds:
            for u, v in r:
                if not self.graph.has_edge(u, v):
                    raise ValueError(f"({u}, {v}) is not an edge")
        if self.state.n != self.graph.n:
            raise ValueError("token state and graph disagree on n")
        if bit_bound(self.rounds, self.state.num_tokens) > BIT_BUDGET:
            raise OracleBudgetError(f"instance may need more than {BIT_BUDGET} random bits")


@dataclass(frozen=True)
class NAResult:
    joint: Fraction
    product: Fraction

    @property
    def passed(self) -> bool:
        return self.joint <= self.product


@dataclass(frozen=True)
class WalkLawResult:
    distribution: tuple[Fraction, ...]
    row: tuple[Fraction, ...]

    @property
    def equal(self) -> bool:
        return self.distribution == self.row


def na_oracle(inst: OracleInstance) -> NAResult:
    n = inst.graph.n
    tokens, start, outcomes, S = location_law(inst.state.stacks, inst.rounds)
    idx = {t: i for i, t in enumerate(tokens)}
    members = [idx[t] for t in inst.B]
    joint = sum(w for locs, w in outcomes if all(locs[i] in inst.D for i in members))
    W = exact_window(_partner_rows(inst.rounds, n), n)
    prod = Fraction(1)
    for i in members:
        prod *= sum((W.entry(start[i], v) for v in inst.D), Fraction(0))
    return NAResult(Fraction(joint, 1 << S), prod)


def walk_law_oracle(inst: OracleInstance, token: int) -> WalkLawResult:
    n = inst.graph.n
    tokens, start, outcomes, S = location_law(inst.state.stacks, inst.rounds)
    i = tokens.index(token)
    dist = [0] * n
    for locs, w in outcomes:
        dist[locs[i]] += w
    W = exact_window(_partner_rows(inst.rounds, n), n)
    return WalkLawResult(tuple(Fraction(d, 1 << S) for d in dist), tuple(W.row(start[i])))


# --- exhaustive family ---------------------------------------------------

def connected_graphs(n: int) -> list[Graph]:
    """All labelled connected simple graphs on n nodes."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for mask in range(1 << len(pairs)):
        es = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        g = Graph.from_edges(n, es, check_connected=False)
        if g.is_connected():
            out.append(g)
    return out


def placements(n: int, max_tokens: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(max_tokens + 1):
        for cut in itertools.combinations(range(total + n - 1), n - 1):
            prev, loads = -1, []
            for c in cut:
                loads.append(c - prev - 1)
                prev = c
            loads.append(total + n - 2 - prev)
            out.append(tuple(loads))
    return out


@dataclass
class InstanceVerdict:
    na_checks: int
    na_failures: list
    walk_checks: int
    walk_failures: list


def evaluate_instance(n: int, rounds: Sequence[Round], loads: Sequence[int]) -> InstanceVerdict:
    """Every (B, D) pair and every token of one (sequence, placement) instance."""
    stacks0 = TokenState.from_loads(loads).stacks
    tokens, start, outcomes, S = location_law(stacks0, rounds)
    T = len(tokens)
    L = len(rounds)
    W = exact_window(_partner_rows(rounds, n), n).num
    Wi = [[int(W[u, v]) for v in range(n)] for u in range(n)]

    walk_fail = []
    for i in range(T):
        dist = [0] * n
        for locs, w in outcomes:
            dist[locs[i]] += w
        for v in range(n):
            # dist/2^S == W/2^L
            if dist[v] << L != Wi[start[i]][v] << S:
                walk_fail.append((tokens[i], v))

    na_fail = []
    full = 1 << T
    for D in range(1 << n):
        col = [sum(Wi[u][v] for v in range(n) if D >> v & 1) for u in range(n)]
        cnt = [0] * full
        for locs, w in outcomes:
            m = 0
            for i in range(T):
                if D >> locs[i] & 1:
                    m |= 1 << i
            cnt[m] += w
        for b in range(T):
            bit = 1 << b
            for m in range(full):
                if not m & bit:
                    cnt[m] += cnt[m | bit]
        prod = [1] * full
        size = [0] * full
        for m in range(1, full):
            low = (m & -m).bit_length() - 1
            prod[m] = prod[m & (m - 1)] * col[start[low]]
            size[m] = size[m & (m - 1)] + 1
        for m in range(full):
            # cnt/2^S <= prod/2^(L*|B|)
            if cnt[m] << (L * size[m]) > prod[m] << S:
                na_fail.append((m, D))
    return InstanceVerdict(full << n, na_fail, T * n, walk_fail)


@dataclass
class FamilyReport:
    max_n: int
    max_len: int
    max_tokens: int
    graphs: int = 0
    instances: int = 0
    distinct_instances: int = 0
    na_checks: int = 0
    walk_checks: int = 0
    na_failures: list = field(default_factory=list)
    walk_failures: list = field(default_factory=list)
    exceptions: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def na_pass(self) -> bool:
        return not self.na_failures and not self.exceptions

    @property
    def walk_pass(self) -> bool:
        return not self.walk_failures and not self.exceptions

    def to_dict(self) -> dict:
        return {
            "max_n": self.max_n, "max_len": self.max_len, "max_tokens": self.max_tokens,
            "graphs": self.graphs, "instances": self.instances,
            "distinct_instances": self.distinct_instances,
            "na_checks": self.na_checks, "walk_checks": self.walk_checks,
            "na_failures": len(self.na_failures), "walk_failures": len(self.walk_failures),
            "exceptions": len(self.exceptions), "seconds": round(self.seconds, 3),
        }


def exhaustive_family(max_n: int = 4, max_len: int = 3, max_tokens: int = 4,
                      min_n: int = 1) -> FamilyReport:
    """All connected graphs, all single-edge sequences, all placements, all B and D.

    Results depend on the graph only through its edge set, so each
    ``(n, sequence, placement)`` is evaluated once and reused.
    """
    t0 = time.perf_counter()
    rep = FamilyReport(max_n, max_len, max_tokens)
    cache: dict = {}
    for n in range(min_n, max_n + 1):
        places = placements(n, max_tokens)
        for g in connected_graphs(n):
            rep.graphs += 1
            for L in range(max_len + 1):
                for seq in itertools.product(g.edges, repeat=L):
                    rounds = tuple(((u, v),) for u, v in seq)
                    for loads in places:
                        rep.instances += 1
                        key = (n, rounds, loads)
                        verdict = cache.get(key)
                        if verdict is None:
                            try:
                                verdict = evaluate_instance(n, rounds, loads)
                            except Exception as exc:  # reported, never swallowed silently
                                rep.exceptions.append((key, repr(exc)))
                                continue
                            cache[key] = verdict
                        rep.na_checks += verdict.na_checks
                        rep.walk_checks += verdict.walk_checks
                        rep.na_failures.extend((g.edges, key, f) for f in verdict.na_failures)
                        rep.walk_failures.extend((g.edges, key, f) for f in verdict.walk_failures)
    rep.distinct_instances = len(cache)
    rep.seconds = time.perf_counter() - t0
    return rep


def family_instances(max_n: int = 4, max_len: int = 3, max_tokens: int = 4) -> Iterable:
    """Yield every (graph, rounds, loads) of the family, undeduplicated."""
    for n in range(1, max_n + 1):
        places = placements(n, max_tokens)
        for g in connected_graphs(n):
            for L in range(max_len + 1):
                for seq in itertools.product(g.edges, repeat=L):
                    for loads in places:
                        yield g, [((u, v),) for u, v in seq], loads
