"""Standard discrete, continuous and height-sensitive balancing engines.

Standard process on a matched pair ``[u:v]`` (``u < v``) with sum ``s``: the
pair becomes ``(ceil(s/2), floor(s/2))`` when the orientation ``phi = +1``
and ``(floor, ceil)`` when ``phi = -1``. The signed rounding error of ``u`` is
``E = Odd(s) * phi / 2`` and ``v`` receives ``-E``.

Two implementations share the orientation hash: :func:`step_standard` walks
pairs one at a time with scalar hashing, :func:`standard_round` advances a
``(trials, n)`` batch in one vectorised pass.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .exact import exact_window_backward
from .rng import TAG_ORIENT, CounterStream, coin, hash_keys
from .schedule import Matching, ScheduleError, ScheduleModel
from .spectral import window_partners
from .tokens import TokenState, run_height_fast, step_height

MAX_TOTAL = 1 << 62


class LoadError(ValueError):
    pass


def as_loads(x: Iterable[int]) -> np.ndarray:
    a = np.asarray(list(x) if not isinstance(x, np.ndarray) else x)
    if a.ndim != 1:
        raise LoadError("load vector must be one-dimensional")
    if a.size and not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.asarray(a, dtype=float) == np.floor(np.asarray(a, dtype=float))):
            raise LoadError("loads must be integers")
    vals = [int(v) for v in a]
    if any(v < 0 for v in vals):
        raise LoadError("loads must be >= 0")
    if sum(vals) >= MAX_TOTAL:
        raise LoadError("total load must be < 2**62")
    return np.array(vals, dtype=np.int64)


# --- rounding trace ------------------------------------------------------

@dataclass(frozen=True)
class RoundingEntry:
    round: int
    u: int
    v: int
    phi: int
    odd: int

    @property
    def error(self) -> Fraction:
        return Fraction(self.odd * self.phi, 2)


@dataclass
class RoundingTrace:
    entries: list[RoundingEntry] = field(default_factory=list)

    def extend(self, es: Iterable[RoundingEntry]) -> None:
        self.entries.extend(es)

    def by_round(self) -> dict[int, list[RoundingEntry]]:
        out: dict[int, list[RoundingEntry]] = {}
        for e in self.entries:
            out.setdefault(e.round, []).append(e)
        return out

    def to_json(self) -> str:
        return json.dumps([{"round": e.round, "u": e.u, "v": e.v, "phi": e.phi} for e in self.entries])


# --- single-trial engines ------------------------------------------------

def step_standard(x: np.ndarray, m: Matching, stream: CounterStream,
                  rnd: int | None = None) -> tuple[np.ndarray, list[RoundingEntry]]:
    t = m.round if rnd is None else rnd
    n = len(x)
    y = np.array(x, dtype=np.int64, copy=True)
    entries = []
    for u, v in m.pairs:
        if v >= n:
            raise ScheduleError(f"matching references node {v} >= n={n}")
        s = int(y[u]) + int(y[v])
        phi = stream.orientation(t, u * n + v)
        hi, lo = (s + 1) // 2, s // 2
        y[u], y[v] = (hi, lo) if phi > 0 else (lo, hi)
        entries.append(RoundingEntry(t, u, v, phi, s & 1))
    return y, entries


def step_continuous(xi, m: Matching):
    """Exact mean on each matched pair; works for float or Fraction vectors."""
    out = list(xi) if not isinstance(xi, np.ndarray) else xi.copy()
    n = len(out)
    for u, v in m.pairs:
        if v >= n:
            raise ScheduleError(f"matching references node {v} >= n={n}")
        mean = (out[u] + out[v]) / 2
        out[u] = out[v] = mean
    return out


Observer = Callable[[int, object], None]


@dataclass
class RunResult:
    state: object
    rounding: RoundingTrace | None = None


def run(engine: str, initial, model: ScheduleModel, T: int, observers: Sequence[Observer] = (),
        seed: int = 0, flip: bool = False) -> RunResult:
    """Run one trial for T rounds, calling every observer at t = 0..T.

    engine: ``standard`` (state: int array, with rounding trace),
    ``continuous`` (float or Fraction list) or ``height`` (TokenState).
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    stream = CounterStream(seed, flip)
    if engine == "standard":
        state = as_loads(initial)
        trace = RoundingTrace()
    elif engine == "continuous":
        state = list(initial)
        trace = None
    elif engine == "height":
        state = initial.copy() if isinstance(initial, TokenState) else TokenState.from_loads(initial)
        trace = None
    else:
        raise ValueError(f"unknown engine {engine!r}; valid: standard, continuous, height")
    for ob in observers:
        ob(0, state)
    for t in range(1, T + 1):
        m = model.matching(t)
        if engine == "standard":
            state, es = step_standard(state, m, stream, t)
            trace.extend(es)
        elif engine == "continuous":
            state = step_continuous(state, m)
        else:
            step_height(state, m, stream, t)
        for ob in observers:
            ob(t, state)
    return RunResult(state, trace)


# --- batched standard engine ---------------------------------------------

def standard_round(X: np.ndarray, partner: np.ndarray, rnd: int, seeds: np.ndarray,
                   flip: bool = False) -> np.ndarray:
    """One round for every trial; ``partner`` is ``(n,)``, ``(1, n)`` or ``(B, n)``."""
    B, n = X.shape
    idx = np.arange(n)
    p = np.asarray(partner)
    if p.ndim == 1:
        p = p[None, :]
    if p.shape[0] == 1:
        xp = X[:, p[0]]
    else:
        xp = np.take_along_axis(X, p, axis=1)
    code = np.minimum(idx, p) * n + np.maximum(idx, p)
    h = hash_keys(np.asarray(seeds, dtype=np.uint64)[:, None], rnd, code, TAG_ORIENT)
    up = coin(h)
    if flip:
        up = ~up
    s = X + xp
    gets_ceil = np.where(idx < p, up, ~up)
    return (s >> 1) + ((s & 1) & gets_ceil)


def run_standard_batch(model: ScheduleModel, x0, T: int, seeds: np.ndarray,
                       schedule_seeds: np.ndarray | None = None, flip: bool = False,
                       observe: Callable[[int, np.ndarray], None] | None = None,
                       observe_rounds: Iterable[int] | None = None, start: int = 0) -> np.ndarray:
    """Run ``len(seeds)`` independent trials for rounds ``start+1 .. start+T``.

    ``seeds`` drive the orientations. ``schedule_seeds`` give each trial its own
    schedule realization; when None every trial shares the model's matchings.
    ``observe(t, X)`` is called at t = start (if listed) and after each listed round
    (all rounds when ``observe_rounds`` is None).
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    B = len(seeds)
    x0 = np.asarray(x0, dtype=np.int64)
    X = np.array(np.broadcast_to(x0, (B, x0.shape[-1])), dtype=np.int64)
    if X.sum(axis=1).max(initial=0) >= MAX_TOTAL:
        raise LoadError("total load must be < 2**62")
    wanted = None if observe_rounds is None else set(int(r) for r in observe_rounds)
    if observe is not None and (wanted is None or start in wanted):
        observe(start, X)
    shared = schedule_seeds is None or not model.randomized
    for t in range(start + 1, start + T + 1):
        if shared:
            p = model.partners(np.array([t]))
        else:
            p = model.partners(np.full(B, t), schedule_seeds)
        X = standard_round(X, p, t, seeds, flip)
        if observe is not None and (wanted is None or t in wanted):
            observe(t, X)
    return X


def coupled_flip_run(x, K: int, model: ScheduleModel, T: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Run from x and from K*1 - x with negated orientations; returns both (T+1, n) traces."""
    x = as_loads(x)
    if K < int(x.max(initial=0)):
        raise LoadError("K must be >= max load")
    xf = K - x
    seeds = np.array([seed], dtype=np.uint64)
    a, b = [x.copy()], [xf.copy()]
    run_standard_batch(model, x, T, seeds, observe=lambda t, X: t and a.append(X[0].copy()))
    run_standard_batch(model, xf, T, seeds, flip=True, observe=lambda t, X: t and b.append(X[0].copy()))
    return np.array(a), np.array(b)


def run_height_batch(state: TokenState, model: ScheduleModel, T: int, seed: int,
                     observe: Callable[[int, TokenState], None] | None = None,
                     chunk: int = 256, on_pair=None) -> TokenState:
    """Height engine over T rounds with chunked, vectorised hashing (in place)."""
    if observe is not None:
        observe(0, state)
    for start in range(1, T + 1, chunk):
        r = np.arange(start, min(start + chunk, T + 1))
        rows = model.partners(r)
        if observe is None:
            run_height_fast(state, rows, r, seed, on_pair=on_pair)
        else:
            for i, t in enumerate(r):
                run_height_fast(state, rows[i:i + 1], r[i:i + 1], seed, on_pair=on_pair)
                observe(int(t), state)
    return state


# --- rounding-error reconstruction ---------------------------------------

@dataclass
class ErrorReconstruction:
    lhs: list[Fraction]
    rhs: list[Fraction]

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    @property
    def max_residual(self) -> Fraction:
        return max((abs(a - b) for a, b in zip(self.lhs, self.rhs)), default=Fraction(0))


def reconstruct_from_errors(x0, model: ScheduleModel, trace: RoundingTrace, t: int,
                            x_t, seed: int | None = None) -> ErrorReconstruction:
    """Both sides of the rounding-error expansion of ``X^(t) - xi^(t)``, exactly.

    lhs: the simulated loads ``x_t`` minus the continuous loads obtained by
    exact pairwise averaging. rhs: ``sum_s sum_[u:v] E (M^[s+1,t]_{u,.} - M^[s+1,t]_{v,.})``
    with the windows accumulated backwards from the identity.
    """
    n = model.n
    rows = window_partners(model, 1, t, seed)
    per_round = trace.by_round()
    matchings = []
    for s, p in enumerate(rows, start=1):
        pairs = sorted((int(u), int(p[u])) for u in np.flatnonzero(p > np.arange(n)))
        got = sorted((e.u, e.v) for e in per_round.get(s, []))
        if pairs != got:
            raise ScheduleError(f"trace does not match the schedule at round {s}")
        matchings.append(Matching(s, tuple(pairs)))
    if set(per_round) - set(range(1, t + 1)):
        raise ScheduleError("trace holds rounds beyond t")

    xi = [Fraction(int(v)) for v in as_loads(x0)]
    for m in matchings:
        xi = step_continuous(xi, m)
    lhs = [Fraction(int(a)) - b for a, b in zip(x_t, xi)]

    acc = [0] * n  # scaled by 2**(t+1)
    for s, W in exact_window_backward(rows, n):
        if s == 0:
            break
        # W is M^[s+1, t]
        for e in per_round.get(s, []):
            if e.odd:
                ru, rv = W.num[e.u], W.num[e.v]
                for w in range(n):
                    acc[w] += e.phi * (int(ru[w]) - int(rv[w]))
    den = 1 << (t + 1)
    rhs = [Fraction(a, den) for a in acc]
    return ErrorReconstruction(lhs, rhs)
