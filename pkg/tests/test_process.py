import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loadbal.graph import complete, cycle, hypercube, path, torus
from loadbal.process import (
    LoadError, coupled_flip_run, reconstruct_from_errors, run, run_height_batch,
    run_standard_batch, step_continuous, step_standard,
)
from loadbal.rng import CounterStream, derive_seed
from loadbal.schedule import (
    CircuitModel, Matching, RandomMatchingModel, ScheduleError, make_model,
)
from loadbal.spectral import window_product
from loadbal.tokens import TokenState

K2 = Matching(1, ((0, 1),))


def test_odd_pair_outcomes_split_evenly():
    outs = [tuple(step_standard(np.array([7, 2]), K2, CounterStream(s))[0]) for s in range(2000)]
    assert set(outs) == {(5, 4), (4, 5)}
    assert abs(outs.count((5, 4)) / 2000 - 0.5) < 3 * np.sqrt(0.25 / 2000)


def test_even_pair_deterministic():
    y, e = step_standard(np.array([6, 2]), K2, CounterStream(0))
    assert y.tolist() == [4, 4] and e[0].error == 0


def test_single_token_pair():
    outs = {tuple(step_standard(np.array([0, 1]), K2, CounterStream(s))[0]) for s in range(50)}
    assert outs == {(1, 0), (0, 1)}


def test_continuous_examples():
    assert step_continuous([7.0, 2.0], K2) == [4.5, 4.5]
    assert step_continuous([Fraction(1), Fraction(2), Fraction(5)], Matching(1, ())) == [1, 2, 5]


def test_run_zero_rounds_is_identity():
    x = [3, 0, 5, 1]
    assert run("standard", x, CircuitModel(cycle(4)), 0).state.tolist() == x


def test_run_k2_conserves():
    assert run("standard", [7, 2], CircuitModel(complete(2)), 1).state.sum() == 9


def test_load_errors():
    with pytest.raises(LoadError):
        run("standard", [-1, 2], CircuitModel(complete(2)), 1)
    with pytest.raises(LoadError):
        run_standard_batch(CircuitModel(complete(2)), [2**62, 0], 1, np.zeros(1, dtype=np.uint64))
    with pytest.raises(ScheduleError):
        step_standard(np.array([1, 2]), Matching(1, ((0, 2),)), CounterStream(0))


def test_flip_example_and_fixed_point():
    m = RandomMatchingModel(cycle(4), 3)
    a, b = coupled_flip_run([4, 0, 0, 0], 4, m, 20, seed=9)
    assert np.array_equal(b, 4 - a)
    a, b = coupled_flip_run([2, 2, 2, 2], 4, m, 20, seed=9)
    assert np.all(a == 2) and np.all(b == 2)
    a, b = coupled_flip_run([3, 1, 0, 4], 4, m, 0, seed=1)
    assert b[0].tolist() == [1, 3, 4, 0]


def test_error_identity_even_sums_only():
    m = CircuitModel(hypercube(2))
    x0 = [4, 0, 0, 0]
    res = run("standard", x0, m, 2, seed=0)
    rec = reconstruct_from_errors(x0, m, res.rounding, 2, res.state)
    assert rec.equal and all(v == 0 for v in rec.rhs)


def test_error_identity_k2_one_round():
    m = CircuitModel(complete(2))
    res = run("standard", [0, 1], m, 1, seed=5)
    rec = reconstruct_from_errors([0, 1], m, res.rounding, 1, res.state)
    phi = res.rounding.entries[0].phi
    assert rec.lhs == rec.rhs == [Fraction(phi, 2), Fraction(-phi, 2)]


def test_error_identity_rejects_wrong_schedule():
    g = cycle(6)
    res = run("standard", [5, 0, 1, 0, 0, 3], RandomMatchingModel(g, 1), 5, seed=1)
    with pytest.raises(ScheduleError):
        reconstruct_from_errors([5, 0, 1, 0, 0, 3], RandomMatchingModel(g, 2), res.rounding, 5, res.state)


def test_trace_json():
    res = run("standard", [3, 0], CircuitModel(complete(2)), 2, seed=2)
    assert [set(d) for d in json.loads(res.rounding.to_json())] == [{"round", "u", "v", "phi"}] * 2


models = st.sampled_from(["circuit", "random_matching", "async"])
graphs = st.sampled_from([hypercube(2), cycle(4), path(4), complete(4), torus(3, 3), cycle(7)])
loads = st.lists(st.integers(0, 50), min_size=9, max_size=9)


@given(graphs, models, st.integers(0, 2**32), loads, st.integers(0, 10))
def test_four_node_error_identity(g, kind, seed, x, T):
    m = make_model(g, kind, seed)
    x0 = x[:g.n]
    res = run("standard", x0, m, T, seed=seed)
    assert reconstruct_from_errors(x0, m, res.rounding, T, res.state).equal


@given(graphs, models, st.integers(0, 2**32), loads, st.integers(0, 40))
def test_conservation_all_engines(g, kind, seed, x, T):
    m = make_model(g, kind, seed)
    x0 = np.array(x[:g.n])
    X = run_standard_batch(m, x0, T, np.array([seed], dtype=np.uint64))
    assert X.sum() == x0.sum()
    H = run_height_batch(TokenState.from_loads(x0), m, T, seed)
    assert H.loads().sum() == x0.sum()
    assert np.array_equal(H.loads(), X[0])


@given(graphs, models, st.integers(0, 2**32), loads, st.integers(0, 40))
def test_continuous_matches_matrix(g, kind, seed, x, T):
    m = make_model(g, kind, seed)
    x0 = np.array(x[:g.n], dtype=float)
    res = run("continuous", list(x0), m, T)
    assert np.allclose(res.state, x0 @ window_product(m, 1, T), atol=1e-9, rtol=0)


@given(graphs, models, st.integers(0, 2**32), loads, st.integers(1, 30))
def test_scalar_and_batch_engines_agree(g, kind, seed, x, T):
    m = make_model(g, kind, seed)
    x0 = np.array(x[:g.n])
    seeds = np.array([seed, derive_seed(seed, 1)], dtype=np.uint64)
    X = run_standard_batch(m, x0, T, seeds)
    for k in range(2):
        assert np.array_equal(run("standard", x0, m, T, seed=int(seeds[k])).state, X[k])
