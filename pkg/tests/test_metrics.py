from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from loadbal.analysis.metrics import (
    above_avg, above_avg_batch, ceil_mean, disc, disc_batch, floor_mean, metrics, y_at_level, y_batch,
)

vecs = st.lists(st.integers(0, 10**6), min_size=1, max_size=40)


def test_examples():
    assert disc([5, 2, 2, 3]) == 3
    assert above_avg([4, 0, 0, 0]) == 3
    assert y_at_level([3, 1, 0], 2) == 1
    assert metrics([4, 0, 0, 0], 1).to_dict() == {"disc": 4, "max": 4, "min": 0, "above_avg": 3.0, "y_count": 3}


def test_above_avg_is_exact():
    assert above_avg([1, 0, 0]) == Fraction(2, 3)
    assert ceil_mean([1, 0, 0]) == 1 and floor_mean([1, 0, 0]) == 0


@given(vecs, st.integers(-10**6, 10**6))
def test_disc_shift_invariant(x, a):
    assert disc(np.array(x) + a) == disc(x)


@given(st.lists(vecs.filter(lambda v: len(v) == 5), min_size=1, max_size=6), st.integers(0, 10**6))
def test_batch_forms_agree(rows, level):
    X = np.array(rows, dtype=np.int64)
    assert disc_batch(X).tolist() == [disc(r) for r in rows]
    assert above_avg_batch(X) == [above_avg(r) for r in rows]
    assert y_batch(X, level).tolist() == [y_at_level(r, level) for r in rows]


@given(vecs)
def test_above_avg_balances_below(x):
    n, tot = len(x), sum(x)
    below = sum(max(Fraction(tot, n) - v, 0) for v in x)
    assert above_avg(x) == below
