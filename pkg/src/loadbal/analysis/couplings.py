"""Exact coupling identities between runs that share their random choices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..process import as_loads, coupled_flip_run, run_height_batch, run_standard_batch
from ..schedule import ScheduleModel
from ..tokens import TokenState


def _trace(model: ScheduleModel, x, T: int, seed: int, flip: bool = False) -> np.ndarray:
    out = []
    run_standard_batch(model, x, T, np.array([seed], dtype=np.uint64), flip=flip,
                       observe=lambda t, X: out.append(X[0].copy()))
    return np.array(out)


def flip_identity_holds(x, K: int, model: ScheduleModel, T: int, seed: int) -> bool:
    """Negated orientations from K - x give exactly K - X at every round."""
    a, b = coupled_flip_run(x, K, model, T, seed)
    return bool(np.array_equal(b, K - a))


def shift_identity_holds(x, alpha: int, model: ScheduleModel, T: int, seed: int) -> bool:
    x = as_loads(x)
    a = _trace(model, x, T, seed)
    b = _trace(model, x + alpha, T, seed)
    return bool(np.array_equal(b - a, np.full_like(a, alpha)))


def domination_holds(x, x_big, model: ScheduleModel, T: int, seed: int) -> bool:
    x, x_big = as_loads(x), as_loads(x_big)
    if np.any(x > x_big):
        raise ValueError("need x <= x_big entrywise")
    return bool(np.all(_trace(model, x, T, seed) <= _trace(model, x_big, T, seed)))


def gap_symmetry_holds(x, K: int, model: ScheduleModel, T: int, seed: int) -> bool:
    """floor(mean) - min X equals max X~ - ceil(mean X~) for the flipped run, every round."""
    a, b = coupled_flip_run(x, K, model, T, seed)
    n = a.shape[1]
    lower = a.sum(axis=1) // n - a.min(axis=1)
    upper = b.max(axis=1) - (-(-b.sum(axis=1) // n))
    return bool(np.array_equal(lower, upper))


@dataclass
class HeightAudit:
    pair_steps: int
    height_violations: int
    y_violations: int
    load_mismatches: int

    @property
    def passed(self) -> bool:
        return self.height_violations == 0 and self.y_violations == 0 and self.load_mismatches == 0


def height_audit(state: TokenState, model: ScheduleModel, T: int, seed: int,
                 levels=(0, 1, 2, 3)) -> HeightAudit:
    """Run the height engine, checking every pair step for height increases.

    Also checks that ``Y`` at each level never grows between rounds and that
    loads agree with the standard engine driven by the same seed.
    """
    audit = HeightAudit(0, 0, 0, 0)

    def on_pair(u, v, before_u, before_v):
        audit.pair_steps += 1
        old = {tok: h for h, tok in enumerate(before_u, 1)}
        old.update({tok: h for h, tok in enumerate(before_v, 1)})
        for s in (state.stacks[u], state.stacks[v]):
            for h, tok in enumerate(s, 1):
                if h > old[tok]:
                    audit.height_violations += 1

    prev_y = [state.count_above(L) for L in levels]
    loads = []

    def observe(t, s):
        nonlocal prev_y
        y = [s.count_above(L) for L in levels]
        audit.y_violations += sum(a > b for a, b in zip(y, prev_y))
        prev_y = y
        loads.append(s.loads())

    x0 = state.loads()
    run_height_batch(state, model, T, seed, observe=observe, on_pair=on_pair)
    std = _trace(model, x0, T, seed)
    audit.load_mismatches = int(np.sum(np.any(np.array(loads) != std, axis=1)))
    return audit
