"""Load-vector metrics. The average is rational, so above-average mass is exact."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class Metrics:
    disc: int
    max: int
    min: int
    above_avg: Fraction
    y_at_level: int | None = None

    def to_dict(self) -> dict:
        d = {"disc": self.disc, "max": self.max, "min": self.min, "above_avg": float(self.above_avg)}
        if self.y_at_level is not None:
            d["y_count"] = self.y_at_level
        return d


def disc(x) -> int:
    x = np.asarray(x)
    return int(x.max() - x.min()) if x.size else 0


def above_avg(x) -> Fraction:
    """sum_w max(x_w - mean, 0) with the mean kept as a fraction."""
    vals = [int(v) for v in np.asarray(x).ravel()]
    n, total = len(vals), sum(vals)
    return Fraction(sum(max(n * v - total, 0) for v in vals), n)


def y_at_level(x, level: int) -> int:
    return int(np.clip(np.asarray(x, dtype=np.int64) - level, 0, None).sum())


def metrics(x, level: int | None = None) -> Metrics:
    x = np.asarray(x, dtype=np.int64)
    return Metrics(disc(x), int(x.max()), int(x.min()), above_avg(x),
                   None if level is None else y_at_level(x, level))


# batched forms over a (trials, n) array

def disc_batch(X: np.ndarray) -> np.ndarray:
    return X.max(axis=1) - X.min(axis=1)


def above_avg_batch_scaled(X: np.ndarray) -> np.ndarray:
    """n * above_avg per trial, as exact integers."""
    n = X.shape[1]
    tot = X.sum(axis=1, keepdims=True)
    return np.clip(n * X - tot, 0, None).sum(axis=1)


def above_avg_batch(X: np.ndarray) -> list[Fraction]:
    n = X.shape[1]
    return [Fraction(int(v), n) for v in above_avg_batch_scaled(X)]


def y_batch(X: np.ndarray, level) -> np.ndarray:
    lv = np.asarray(level).reshape(-1, 1) if np.ndim(level) else level
    return np.clip(X - lv, 0, None).sum(axis=1)


def ceil_mean(x) -> int:
    x = np.asarray(x)
    return -(-int(x.sum()) // x.shape[-1])


def floor_mean(x) -> int:
    x = np.asarray(x)
    return int(x.sum()) // x.shape[-1]
