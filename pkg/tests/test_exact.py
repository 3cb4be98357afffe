from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from loadbal.exact import DyadicMatrix, exact_window, exact_window_backward, fraction_vector_times
from loadbal.graph import path
from loadbal.schedule import RandomMatchingModel
from loadbal.spectral import window_partners


def _frac_product(rows, n):
    # oracle: explicit Fraction matrix products
    W = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for p in rows:
        M = [[Fraction(0)] * n for _ in range(n)]
        for u in range(n):
            if p[u] == u:
                M[u][u] = Fraction(1)
            else:
                M[u][u] = M[u][p[u]] = Fraction(1, 2)
        W = [[sum(W[i][k] * M[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return W


def test_identity_and_rescale():
    I = DyadicMatrix.identity(3, 2)
    assert I.entry(1, 1) == 1 and I.rescaled(5).entry(1, 1) == 1


def test_p3_walk_row():
    rows = [np.array([1, 0, 2]), np.array([0, 2, 1])]
    W = exact_window(rows, 3)
    assert W.row(0) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]


@given(st.integers(0, 2**32), st.integers(0, 12))
def test_exact_window_matches_fraction_oracle(seed, t):
    g = path(5)
    rows = window_partners(RandomMatchingModel(g, seed), 1, t) if t else []
    assert exact_window(rows, 5).to_fractions() == _frac_product(rows, 5)


@given(st.integers(0, 2**32), st.integers(1, 10))
def test_backward_windows_are_suffix_products(seed, t):
    rows = window_partners(RandomMatchingModel(path(4), seed), 1, t)
    for s, W in exact_window_backward(rows, 4):
        assert W.to_fractions() == _frac_product(rows[s:], 4)


def test_fraction_vector_times():
    W = exact_window([np.array([1, 0, 2])], 3)
    assert fraction_vector_times([1, 0, 3], W) == [Fraction(1, 2), Fraction(1, 2), Fraction(3)]
