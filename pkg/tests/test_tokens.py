import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loadbal.graph import complete, cycle, hypercube, torus
from loadbal.process import run_standard_batch
from loadbal.rng import CounterStream
from loadbal.schedule import CircuitModel, Matching, RandomMatchingModel, make_model
from loadbal.spectral import window_partners
from loadbal.tokens import TokenState, TokenStateError, apply_pair, run_height_fast, step_height


def test_moving_step_example():
    stacks = [[1, 2, 3, 4, 5, 6, 7], [8, 9]]
    apply_pair(stacks, 0, 1, [False] * 4, excess=False)
    assert stacks == [[1, 2, 3, 4], [8, 9, 5, 6, 7]]


def test_equal_loads_only_shuffle():
    for swaps in itertools.product([False, True], repeat=2):
        stacks = [[1, 2], [3, 4]]
        apply_pair(stacks, 0, 1, list(swaps), excess=False)
        assert sorted(map(len, stacks)) == [2, 2]
        for h in range(2):
            assert {stacks[0][h], stacks[1][h]} == {[1, 2][h], [3, 4][h]}


def test_two_tokens_one_shuffle_bit():
    outcomes = []
    for bit in (False, True):
        stacks = [["a", "b"], []]
        apply_pair(stacks, 0, 1, [bit], excess=False)
        outcomes.append(stacks)
    assert outcomes == [[["a"], ["b"]], [["b"], ["a"]]]


def test_duplicate_token_rejected():
    with pytest.raises(TokenStateError):
        TokenState([[1, 2], [2]])


def test_from_loads_numbering():
    st_ = TokenState.from_loads([2, 0, 3])
    assert st_.stacks == [[1, 2], [], [3, 4, 5]]
    assert st_.count_above(1) == 3
    assert st_.positions()[4] == (2, 2)


@given(st.integers(0, 12), st.integers(0, 12), st.integers(0, 2**32), st.integers(1, 50))
def test_height_loads_match_standard_on_a_pair(a, b, seed, t):
    g = complete(2)
    m = CircuitModel(g)
    s = TokenState.from_loads([a, b])
    step_height(s, Matching(t, ((0, 1),)), CounterStream(seed), t)
    X = run_standard_batch(m, [a, b], 1, np.array([seed], dtype=np.uint64), start=t - 1)
    assert s.loads().tolist() == X[0].tolist()
    s.check_invariants()


graphs = st.sampled_from([hypercube(3), cycle(5), torus(3, 3), complete(5)])


@given(graphs, st.sampled_from(["circuit", "random_matching", "async"]), st.integers(0, 2**32),
       st.lists(st.integers(0, 9), min_size=9, max_size=9), st.integers(1, 30))
def test_fast_engine_equals_reference(g, kind, seed, loads, T):
    m = make_model(g, kind, seed)
    x = loads[:g.n] + [0] * max(0, g.n - len(loads))
    ref = TokenState.from_loads(x)
    stream = CounterStream(seed)
    for t in range(1, T + 1):
        step_height(ref, m.matching(t), stream, t)
    fast = TokenState.from_loads(x)
    rows = np.array(window_partners(m, 1, T))
    run_height_fast(fast, rows, np.arange(1, T + 1), seed)
    assert fast == ref


@given(graphs, st.integers(0, 2**32), st.lists(st.integers(0, 9), min_size=9, max_size=9))
def test_heights_never_increase(g, seed, loads):
    x = loads[:g.n]
    s = TokenState.from_loads(x)
    m = RandomMatchingModel(g, seed)
    stream = CounterStream(seed)
    before = s.positions()
    for t in range(1, 25):
        step_height(s, m.matching(t), stream, t)
        now = s.positions()
        assert all(now[k][1] <= before[k][1] for k in now)
        before = now


def test_ceil_lands_on_each_endpoint_half_the_time():
    trials = 4000
    hits = 0
    for k in range(trials):
        s = TokenState.from_loads([5, 2])
        step_height(s, Matching(1, ((0, 1),)), CounterStream(k), 1)
        hits += s.loads()[0] == 4
    sigma = np.sqrt(0.25 / trials)
    assert abs(hits / trials - 0.5) <= 3 * sigma
