"""Matching matrices, window products, spectral quantities, smoothing and goodness checks.

Convention: loads are row vectors and one round maps ``x -> x @ M``; the
window ``M^[t1, t2] = M^(t1) @ ... @ M^(t2)`` is the identity when
``t1 > t2``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exact import exact_window
from .graph import Graph
from .schedule import (
    AsyncEdgeModel,
    CircuitModel,
    Matching,
    RandomMatchingModel,
    ScheduleError,
    ScheduleModel,
    measure_p_min,
)

STOCHASTIC_TOL = 1e-12
EIG_TOL = 1e-10


class SpectralError(ValueError):
    pass


# --- matrices ------------------------------------------------------------

def matching_matrix(m: Matching, n: int) -> np.ndarray:
    M = np.eye(n)
    for u, v in m.pairs:
        if v >= n:
            raise ScheduleError(f"matching references node {v} >= n={n}")
        M[u, u] = M[v, v] = M[u, v] = M[v, u] = 0.5
    return M


def product_of_partners(partner_rows: Iterable[np.ndarray], n: int) -> np.ndarray:
    P = np.eye(n)
    for p in partner_rows:
        # right-multiplying by a matching matrix averages the paired columns
        P = 0.5 * (P + P[:, p])
    return P


def window_partners(model: ScheduleModel, t1: int, t2: int, seed: int | None = None) -> list[np.ndarray]:
    if t1 < 1:
        raise ScheduleError("window start must be >= 1")
    if t1 > t2:
        return []
    rounds = np.arange(t1, t2 + 1)
    s = np.uint64(model.seed if seed is None else seed)
    return list(np.asarray(model.partners(rounds, np.full(len(rounds), s, dtype=np.uint64))))


def window_product(model: ScheduleModel, t1: int, t2: int, seed: int | None = None,
                   exact: bool = False):
    """``M^[t1, t2]`` of one schedule realization (the model's seed unless given).

    ``exact=True`` returns a :class:`DyadicMatrix`.
    """
    rows = window_partners(model, t1, t2, seed)
    if exact:
        return exact_window(rows, model.n)
    return product_of_partners(rows, model.n)


def is_doubly_stochastic(M: np.ndarray, tol: float = STOCHASTIC_TOL) -> bool:
    if np.any(M < -tol) or np.any(M > 1 + tol):
        return False
    return bool(np.all(np.abs(M.sum(0) - 1) <= tol) and np.all(np.abs(M.sum(1) - 1) <= tol))


def diffusion_matrix(g: Graph) -> np.ndarray:
    D = 2.0 * g.max_degree
    P = np.zeros((g.n, g.n))
    for u, v in g.edges:
        P[u, v] = P[v, u] = 1.0 / D
    P[np.diag_indices(g.n)] = 1.0 - g.degrees() / D
    return P


def spectral_lambda(M: np.ndarray) -> float:
    """``max(|l_2|, |l_n|)`` of ``M`` if symmetric, otherwise of ``M @ M.T``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 1:
        return 0.0
    S = M if np.allclose(M, M.T, atol=EIG_TOL, rtol=0) else M @ M.T
    try:
        ev = np.linalg.eigvalsh(0.5 * (S + S.T))
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolve failed: {exc}") from exc
    ev = np.sort(ev)[::-1]
    return float(max(abs(ev[1]), abs(ev[-1])))


def tau_spectral(kind: str, K: float, n: int, max_degree: int, lam: float,
                 p_min: float | None = None, multiplier: float = 8.0,
                 num_edges: int | None = None) -> int:
    """Spectral round bound with an explicit constant, natural logs, rounded up.

    circuit: ``mult * D * ln(Kn) / (1 - lam)`` with D the number of matchings per period.
    random_matching: ``mult * ln(Kn) / (p_min * D * (1 - lam))`` with D the max degree.
    async: as random_matching with ``p_min = 1/|E|``.
    """
    if multiplier <= 0:
        raise SpectralError("multiplier must be positive")
    if K < 1:
        raise SpectralError("K must be >= 1")
    if not lam < 1:
        raise SpectralError(f"lambda = {lam} >= 1: schedule does not mix (disconnected or degenerate)")
    if lam < 0:
        raise SpectralError("lambda must be >= 0")
    log_kn = math.log(K * n)
    if kind == "circuit":
        val = multiplier * max_degree * log_kn / (1 - lam)
    elif kind in ("random_matching", "async", "async_edge"):
        if kind != "random_matching":
            if num_edges is None:
                raise SpectralError("async bound needs num_edges")
            p_min = 1.0 / num_edges
        if p_min is None or p_min <= 0:
            raise SpectralError("p_min must be positive")
        val = multiplier * log_kn / (p_min * max_degree * (1 - lam))
    else:
        raise SpectralError(f"unknown kind {kind!r}")
    return max(1, math.ceil(val - 1e-9))


def goodness_windows(kind: str, n: int, max_degree: int, lam: float,
                     p_min: float | None = None) -> tuple[int, int]:
    """Window lengths ``(tau_global, tau_local)`` under which the schedule is good.

    Circuit: ``7 D ln n / (1 - lam)`` and ``11 D ln ln n / (1 - lam)``.
    Random schedules: ``14 ln n / (p_min D (1 - lam(P)))`` and ``22 ln ln n / (...)``.
    """
    if n < 3:
        raise SpectralError("goodness windows need n >= 3 (ln ln n > 0)")
    if not 0 <= lam < 1:
        raise SpectralError(f"lambda = {lam} outside [0, 1)")
    lnn, lnlnn = math.log(n), math.log(math.log(n))
    if kind == "circuit":
        g = 7 * max_degree * lnn / (1 - lam)
        loc = 11 * max_degree * lnlnn / (1 - lam)
    else:
        if p_min is None or p_min <= 0:
            raise SpectralError("p_min must be positive")
        den = p_min * max_degree * (1 - lam)
        g, loc = 14 * lnn / den, 22 * lnlnn / den
    return math.ceil(g), max(1, math.ceil(loc))


# --- reports -------------------------------------------------------------

@dataclass
class SpectralReport:
    lambda_: float
    diffusion_p: np.ndarray | None
    p_min: float | None
    tau_spectral: int
    constant_multiplier: float
    kind: str = ""
    max_degree: int = 0

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambda_,
            "diffusion_p": None if self.diffusion_p is None else self.diffusion_p.tolist(),
            "p_min": self.p_min,
            "tau_spectral": self.tau_spectral,
            "constant_multiplier": self.constant_multiplier,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def schedule_lambda(model: ScheduleModel) -> float:
    """lambda(M^[1, period]) for circuits, lambda(P) for random schedules."""
    if isinstance(model, CircuitModel):
        return spectral_lambda(window_product(model, 1, model.period))
    if isinstance(model, (RandomMatchingModel, AsyncEdgeModel)):
        return spectral_lambda(diffusion_matrix(model.graph))
    raise SpectralError(f"no spectral quantity defined for {model.kind} schedules")


def spectral_report(model: ScheduleModel, K: float, multiplier: float = 8.0,
                    measure_rounds: int | None = None) -> SpectralReport:
    """``measure_rounds`` switches random matching to the empirical p_min."""
    g = model.graph
    if isinstance(model, CircuitModel):
        lam = schedule_lambda(model)
        tau = tau_spectral("circuit", K, g.n, model.period, lam, multiplier=multiplier)
        return SpectralReport(lam, None, None, tau, multiplier, "circuit", model.period)
    if isinstance(model, (RandomMatchingModel, AsyncEdgeModel)):
        P = diffusion_matrix(g)
        lam = spectral_lambda(P)
        if isinstance(model, AsyncEdgeModel):
            p = 1.0 / g.m
            tau = tau_spectral("async", K, g.n, g.max_degree, lam, multiplier=multiplier, num_edges=g.m)
        else:
            if measure_rounds:
                p = min(measure_p_min(model, measure_rounds).values())
            else:
                p = model.p_min()
            tau = tau_spectral("random_matching", K, g.n, g.max_degree, lam, p, multiplier)
        return SpectralReport(lam, P, p, tau, multiplier, model.kind, g.max_degree)
    raise SpectralError(f"no spectral report for {model.kind} schedules")


# --- smoothing -----------------------------------------------------------

@dataclass(frozen=True)
class SmoothingResult:
    passed: bool
    worst_disc: float

    def to_dict(self) -> dict:
        return {"pass": self.passed, "worst_disc": self.worst_disc}


def worst_discrepancy(M: np.ndarray, K: float) -> float:
    """``K * max_{w,w'} sum_u max(M[u,w] - M[u,w'], 0)``: exact worst case over disc(x) <= K."""
    M = np.asarray(M, dtype=float)
    best = 0.0
    for w in range(M.shape[1]):
        col = np.clip(M[:, w:w + 1] - M, 0.0, None).sum(axis=0)
        best = max(best, float(col.max()))
    return K * best


def check_smoothing_matrix(M: np.ndarray, K: float, eps: float) -> SmoothingResult:
    wd = worst_discrepancy(M, K)
    return SmoothingResult(wd <= eps, wd)


def check_smoothing(model: ScheduleModel, t: int, K: float, eps: float,
                    seed: int | None = None) -> SmoothingResult:
    if t < 1:
        raise ScheduleError("smoothing prefix must have t >= 1")
    return check_smoothing_matrix(window_product(model, 1, t, seed), K, eps)


def smoothing_prefix(model: ScheduleModel, K: float, eps: float, max_rounds: int,
                     seed: int | None = None, step: int = 1) -> int | None:
    """Smallest t (in multiples of ``step``) whose prefix is (K, eps)-smoothing."""
    rows = window_partners(model, 1, max_rounds, seed)
    P = np.eye(model.n)
    for t, p in enumerate(rows, start=1):
        P = 0.5 * (P + P[:, p])
        if t % step == 0 and worst_discrepancy(P, K) <= eps:
            return t
    return None


# --- goodness ------------------------------------------------------------

def row_dist2(M: np.ndarray) -> np.ndarray:
    """Squared l2 distance of each row to the uniform vector."""
    n = M.shape[1]
    return ((M - 1.0 / n) ** 2).sum(axis=1)


def row_norm2(M: np.ndarray) -> np.ndarray:
    return (M ** 2).sum(axis=1)


def global_threshold(n: int) -> float:
    return float(n) ** -7


def local_threshold(n: int) -> float:
    return math.log(n) ** -10


def global_event(M: np.ndarray) -> bool:
    return bool(np.all(row_dist2(M) <= global_threshold(M.shape[0])))


def local_event_rows(M: np.ndarray) -> np.ndarray:
    return row_norm2(M) <= local_threshold(M.shape[0])


def global_event_windowed(model: ScheduleModel, t: int, tau_g: int, seed: int | None = None) -> bool:
    """Global event on ``M^[t+1, t+tau_g]`` (arbitrary window start)."""
    return global_event(window_product(model, t + 1, t + tau_g, seed))


def global_event_anchored(model: ScheduleModel, tau_g: int, seed: int | None = None) -> bool:
    """Global event on ``M^[1, tau_g]`` (window anchored at round 1)."""
    return global_event(window_product(model, 1, tau_g, seed))


@dataclass
class GoodnessReport:
    tau_global_estimate: int | None
    tau_local_estimate: int | None
    gamma_g_pass: float
    gamma_l_pass: float
    windows_global: list[int] = field(default_factory=list)
    windows_local: list[int] = field(default_factory=list)
    pass_global: list[float] = field(default_factory=list)
    pass_local: list[float] = field(default_factory=list)
    gamma_g_anchored_pass: float | None = None

    def to_dict(self) -> dict:
        return {
            "tau_global_estimate": self.tau_global_estimate,
            "tau_local_estimate": self.tau_local_estimate,
            "gamma_g_pass": self.gamma_g_pass,
            "gamma_l_pass": self.gamma_l_pass,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _as_list(x) -> list[int]:
    if isinstance(x, (int, np.integer)):
        return [int(x)]
    out = sorted(int(v) for v in x)
    if not out or out[0] < 1:
        raise ScheduleError("windows must be >= 1")
    return out


def check_goodness(model: ScheduleModel, tau_g, tau_l, start_rounds: Sequence[int],
                   seeds: Sequence[int] | None = None) -> GoodnessReport:
    """Sampled evaluation of the global and local window events.

    ``tau_g`` / ``tau_l`` may be a single window or a list of candidates. The
    pass fractions reported in ``gamma_*_pass`` belong to the largest
    candidate; the estimates are the smallest candidate whose pass fraction
    reaches ``1 - 1/n^3`` (global) or ``1 - 1/ln^11 n`` (local), else None.
    ``seeds`` lists schedule realizations for random models (default: the
    model's seed).
    """
    gs, ls = _as_list(tau_g), _as_list(tau_l)
    if gs[0] < 1 or ls[0] < 1:
        raise ScheduleError("windows must be >= 1")
    n = model.n
    starts = list(start_rounds)
    if not starts:
        raise ScheduleError("need at least one start round")
    if any(t < 0 for t in starts):
        raise ScheduleError("start rounds must be >= 0")
    real = [None] if seeds is None or not model.randomized else list(seeds)
    target_g = 1 - n ** -3.0
    target_l = 1 - math.log(n) ** -11 if n >= 3 else 1.0

    pass_g, pass_l = [], []
    for w in gs:
        hits = total = 0
        for s in real:
            for t in starts:
                hits += global_event(window_product(model, t + 1, t + w, s))
                total += 1
        pass_g.append(hits / total)
    for w in ls:
        hits = total = 0
        for s in real:
            for t in starts:
                ok = local_event_rows(window_product(model, t + 1, t + w, s))
                hits += int(ok.sum())
                total += n
        pass_l.append(hits / total)

    est_g = next((w for w, f in zip(gs, pass_g) if f >= target_g), None)
    est_l = next((w for w, f in zip(ls, pass_l) if f >= target_l), None)
    anchored = float(np.mean([global_event_anchored(model, gs[-1], s) for s in real]))
    return GoodnessReport(est_g, est_l, pass_g[-1], pass_l[-1], gs, ls, pass_g, pass_l, anchored)
