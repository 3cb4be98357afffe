"""Exact dyadic arithmetic for window products.

Every entry of a product of ``L`` matching matrices is a multiple of
``2**-L``, so a window is held as an integer matrix ``num`` together with the
exponent ``L``: the true value is ``num / 2**L``. Integers are Python ints
(object arrays), so there is no overflow for long windows.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


@dataclass
class DyadicMatrix:
    num: np.ndarray  # object array of Python ints
    exp: int

    @property
    def n(self) -> int:
        return self.num.shape[0]

    @classmethod
    def identity(cls, n: int, exp: int = 0) -> "DyadicMatrix":
        num = np.zeros((n, n), dtype=object)
        for i in range(n):
            num[i, i] = 1 << exp
        return cls(num, exp)

    def entry(self, u: int, v: int) -> Fraction:
        return Fraction(int(self.num[u, v]), 1 << self.exp)

    def row(self, u: int) -> list[Fraction]:
        d = 1 << self.exp
        return [Fraction(int(a), d) for a in self.num[u]]

    def to_fractions(self) -> list[list[Fraction]]:
        return [self.row(u) for u in range(self.n)]

    def to_float(self) -> np.ndarray:
        return np.array([[float(self.entry(u, v)) for v in range(self.n)] for u in range(self.n)])

    def rescaled(self, exp: int) -> "DyadicMatrix":
        if exp < self.exp:
            raise ValueError("can only raise the exponent")
        return DyadicMatrix(self.num * (1 << (exp - self.exp)), exp)


def exact_window(partner_rows: Sequence[np.ndarray], n: int) -> DyadicMatrix:
    """Exact ``M^(1) ... M^(L)`` from a list of partner arrays (column averaging)."""
    L = len(partner_rows)
    W = DyadicMatrix.identity(n, L)
    num = W.num
    for p in partner_rows:
        p = np.asarray(p)
        # both summands share a factor 2 while fewer than L averagings happened
        num = (num + num[:, p]) // 2
    return DyadicMatrix(num, L)


def exact_window_backward(partner_rows: Sequence[np.ndarray], n: int):
    """Yield ``(s, M^[s+1, L])`` for ``s = L, L-1, ..., 0`` by row averaging.

    All yielded matrices share the exponent ``L``.
    """
    L = len(partner_rows)
    num = DyadicMatrix.identity(n, L).num
    yield L, DyadicMatrix(num, L)
    for s in range(L, 0, -1):
        p = np.asarray(partner_rows[s - 1])
        num = (num + num[p, :]) // 2
        yield s - 1, DyadicMatrix(num, L)


def fraction_vector_times(x: Sequence, W: DyadicMatrix) -> list[Fraction]:
    """Row vector ``x`` times the exact matrix ``W``."""
    d = 1 << W.exp
    xs = [Fraction(v) for v in x]
    out = []
    for w in range(W.n):
        acc = Fraction(0)
        for u, xu in enumerate(xs):
            if xu:
                acc += xu * int(W.num[u, w])
        out.append(acc / d)
    return out
