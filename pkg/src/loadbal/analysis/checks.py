"""Statistical and numeric checks of concentration, collision and potential bounds."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..process import run_height_batch, run_standard_batch
from ..rng import derive_seed, trial_seeds
from ..schedule import ReplayModel, ScheduleModel
from ..spectral import check_smoothing, product_of_partners, window_partners
from ..tokens import TokenState
from .metrics import disc


class CheckError(ValueError):
    pass


def binomial_sigma(p: float, trials: int) -> float:
    p = min(max(p, 0.0), 1.0)
    return math.sqrt(p * (1 - p) / trials)


# --- convex-combination tail ---------------------------------------------

def tail_bound(delta: float, kappa: float, a_norm2: float) -> float:
    if delta <= kappa:
        return 2.0
    return 2.0 * math.exp(-((delta - kappa) ** 2) / (4.0 * a_norm2))


@dataclass
class TailCheck:
    a: np.ndarray
    deltas: list[float]
    trials: int
    kappa: float
    empirical: list[float]
    bound: list[float]
    sigma: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e <= b + 3 * s for e, b, s in zip(self.empirical, self.bound, self.sigma))

    def to_dict(self) -> dict:
        return {
            "a": self.a.tolist(), "deltas": self.deltas, "trials": self.trials,
            "kappa": self.kappa, "empirical": self.empirical, "bound": self.bound,
            "sigma": self.sigma, "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def hoeffding_check(model: ScheduleModel, x0, t: int, a, kappa: float, deltas: Sequence[float],
                    trials: int, seed: int, K: float | None = None) -> TailCheck:
    """Empirical ``Pr[|a . X^(t) - mean| >= delta]`` against ``2 exp(-(delta-kappa)^2 / (4 |a|^2))``.

    Matchings are the model's fixed realization; only orientations vary per trial.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0) or abs(a.sum() - 1) > 1e-12:
        raise CheckError("a must be a stochastic vector")
    x0 = np.asarray(x0, dtype=np.int64)
    K = disc(x0) if K is None else K
    if K <= kappa:
        raise CheckError("need K > kappa")
    sm = check_smoothing(model, t, K, kappa)
    if not sm.passed:
        raise CheckError(f"prefix of {t} rounds is not ({K}, {kappa})-smoothing "
                         f"(worst_disc = {sm.worst_disc:.3g})")
    X = run_standard_batch(model, x0, t, trial_seeds(seed, trials))
    mean = x0.sum() / len(x0)
    dev = np.abs(X @ a - mean)
    norm2 = float(a @ a)
    emp, bnd, sig = [], [], []
    for d in deltas:
        e = float(np.mean(dev >= d - 1e-12))
        b = tail_bound(d, kappa, norm2)
        emp.append(e)
        bnd.append(b)
        sig.append(binomial_sigma(min(b, 1.0), trials))
    return TailCheck(a, [float(d) for d in deltas], trials, kappa, emp, bnd, sig)


# --- collision bound ------------------------------------------------------

@dataclass
class CollisionCheck:
    token: int
    empirical_mean: float
    rhs: float
    sigma: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.empirical_mean <= self.rhs + 3 * self.sigma + 1e-12

    def to_dict(self) -> dict:
        return {"token": self.token, "empirical_mean": self.empirical_mean, "rhs": self.rhs,
                "sigma": self.sigma, "trials": self.trials, "pass": self.passed}


def collision_weights(M: np.ndarray, u: int) -> np.ndarray:
    """a_w = sum_v M[u, v] M[w, v]."""
    return M @ M[u]


def collision_bound_check(model: ScheduleModel, state: TokenState, u: int, window: int,
                          trials: int, seed: int, t_start: int = 0,
                          token: int | None = None) -> CollisionCheck:
    """Mean number of tokens sharing a node with ``token`` after the window vs its bound.

    The window's matchings (rounds t_start+1 .. t_start+window of the model's
    realization) are fixed; shuffle randomness varies over trials. The default
    token is the top token of node u.
    """
    if not state.stacks[u]:
        raise CheckError(f"no token on node {u}")
    token = state.stacks[u][-1] if token is None else token
    if token not in state.stacks[u]:
        raise CheckError(f"token {token} is not on node {u}")
    rows = window_partners(model, t_start + 1, t_start + window) if window else []
    M = product_of_partners(rows, model.n)
    x = state.loads()
    rhs = float(collision_weights(M, u) @ x)
    replay = ReplayModel(model.graph, [[(int(a), int(p[a])) for a in np.flatnonzero(p > np.arange(model.n))]
                                       for p in rows], validate=False)
    z = np.empty(trials)
    for k in range(trials):
        s = state.copy()
        run_height_batch(s, replay, window, derive_seed(seed, k))
        where = s.location(token)
        z[k] = len(s.stacks[where]) - 1
    mean = float(z.mean())
    sd = float(z.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return CollisionCheck(token, mean, rhs, sd, trials)


# --- potential identity -------------------------------------------------

@dataclass
class PsiCheck:
    max_residual: float
    cumulative: float
    bound1: float
    max_norm2: float
    bound2: float

    @property
    def bound1_ok(self) -> bool:
        return self.cumulative <= self.bound1 + 1e-12

    @property
    def bound2_ok(self) -> bool:
        return self.max_norm2 <= self.bound2 + 1e-12

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "cumulative": self.cumulative,
                "bound1": self.bound1, "max_norm2": self.max_norm2, "bound2": self.bound2,
                "bound1_ok": self.bound1_ok, "bound2_ok": self.bound2_ok}


def psi_identity_check(a, partner_rows: Sequence[np.ndarray], t: int | None = None) -> PsiCheck:
    """Per-round potential identity and its two summary bounds.

    ``Psi(s) = sum_w ((M^[s+1,t] a)_w - 1/n)^2`` is evaluated from explicitly
    accumulated window matrices; the right-hand side
    ``1/2 sum_[u:v] (y_u - y_v)^2`` uses ``y = M^[s+1,t] a`` propagated as a
    vector.
    """
    a = np.asarray(a, dtype=float)
    n = len(a)
    rows = list(partner_rows)
    t = len(rows) if t is None else t
    rows = rows[:t]
    idx = np.arange(n)

    # matrix route: W_s = M^[s+1, t], s = t .. 0
    W = np.eye(n)
    psi = [0.0] * (t + 1)
    psi[t] = float(((W @ a - 1.0 / n) ** 2).sum())
    for s in range(t, 0, -1):
        p = rows[s - 1]
        W = 0.5 * (W + W[p, :])
        psi[s - 1] = float(((W @ a - 1.0 / n) ** 2).sum())

    # vector route
    y = a.copy()
    resid = 0.0
    cumulative = 0.0
    max_norm2 = float(y @ y)
    for s in range(t, 0, -1):
        p = rows[s - 1]
        lo = idx < p
        gap = float(((y[lo] - y[p[lo]]) ** 2).sum())
        cumulative += gap
        resid = max(resid, abs((psi[s] - psi[s - 1]) - 0.5 * gap))
        y = 0.5 * (y + y[p])
        max_norm2 = max(max_norm2, float(y @ y))
    norm2 = float(a @ a)
    return PsiCheck(resid, cumulative, 2 * norm2, max_norm2, norm2)


# --- l2 observations on window rows --------------------------------------

@dataclass
class RowNormCheck:
    identity_residual: float
    max_increase: float
    rounds: int

    def passed(self, tol_identity: float = 1e-12, tol_mono: float = 1e-12) -> bool:
        return self.identity_residual < tol_identity and self.max_increase <= tol_mono


def row_norm_check(partner_rows: Sequence[np.ndarray], n: int) -> RowNormCheck:
    """Along M^[1,t]: ``|row - 1/n|^2 = |row|^2 - 1/n`` and the distance never grows."""
    P = np.eye(n)
    prev = ((P - 1.0 / n) ** 2).sum(axis=1)
    resid = float(np.abs(prev - ((P ** 2).sum(axis=1) - 1.0 / n)).max())
    worst = -np.inf
    for p in partner_rows:
        P = 0.5 * (P + P[:, p])
        d = ((P - 1.0 / n) ** 2).sum(axis=1)
        resid = max(resid, float(np.abs(d - ((P ** 2).sum(axis=1) - 1.0 / n)).max()))
        worst = max(worst, float((d - prev).max()))
        prev = d
    return RowNormCheck(resid, float(worst) if np.isfinite(worst) else 0.0, len(partner_rows))

