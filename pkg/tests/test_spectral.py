import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loadbal.graph import complete, cycle, hypercube, path, random_regular, star, torus
from loadbal.schedule import CircuitModel, Matching, RandomMatchingModel, make_model
from loadbal.spectral import (
    SpectralError, check_goodness, check_smoothing, check_smoothing_matrix, diffusion_matrix,
    global_event, goodness_windows, is_doubly_stochastic, matching_matrix, row_dist2, row_norm2,
    schedule_lambda, smoothing_prefix, spectral_lambda, spectral_report, tau_spectral,
    window_partners, window_product, worst_discrepancy,
)

HALF = np.full((2, 2), 0.5)


def test_matching_matrix_examples():
    assert np.array_equal(matching_matrix(Matching(1, ((0, 1),)), 2), HALF)
    assert np.array_equal(matching_matrix(Matching(1, ()), 3), np.eye(3))
    P3 = matching_matrix(Matching(1, ((0, 1),)), 3)
    assert np.array_equal(P3, [[.5, .5, 0], [.5, .5, 0], [0, 0, 1]])


def test_window_examples():
    m = CircuitModel(complete(2))
    assert np.array_equal(window_product(m, 5, 4), np.eye(2))
    assert np.array_equal(window_product(m, 1, 1), HALF)
    assert np.array_equal(window_product(m, 1, 2), HALF)


def test_lambda_examples():
    assert spectral_lambda(HALF) == pytest.approx(0, abs=1e-12)
    assert spectral_lambda(np.eye(5)) == pytest.approx(1)


def test_hypercube3_period_lambda_golden():
    # oracle: exact product of the three dimension matchings is the all-1/8 matrix
    W = window_product(CircuitModel(hypercube(3)), 1, 3, exact=True)
    assert all(x == Fraction(1, 8) for row in W.to_fractions() for x in row)
    assert schedule_lambda(CircuitModel(hypercube(3))) == pytest.approx(0.0, abs=1e-12)


def test_lambda_of_nonsymmetric_uses_gram():
    # an odd cycle needs three colour classes; the period product is not symmetric
    m = CircuitModel(cycle(5))
    M = window_product(m, 1, m.period)
    ev = np.sort(np.linalg.eigvals(M @ M.T).real)[::-1]
    assert spectral_lambda(M) == pytest.approx(max(abs(ev[1]), abs(ev[-1])))


def test_diffusion_examples():
    P = diffusion_matrix(cycle(3))
    assert np.allclose(P, [[.5, .25, .25], [.25, .5, .25], [.25, .25, .5]])
    assert np.allclose(diffusion_matrix(complete(2)), HALF)
    S = diffusion_matrix(star(3))
    assert S[0, 0] == pytest.approx(0.5)
    assert S[1, 1] == pytest.approx(5 / 6)


def test_tau_circuit_example():
    assert tau_spectral("circuit", 4, 4, 2, 0.5, multiplier=1) == 12


def test_tau_async_complete4():
    g = complete(4)
    lam = spectral_lambda(diffusion_matrix(g))
    want = math.ceil(8 * math.log(4 * 4) / (0.5 * (1 - lam)))
    assert tau_spectral("async", 4, 4, 3, lam, num_edges=6) == want


def test_tau_rejects_bad_inputs():
    with pytest.raises(SpectralError, match="multiplier must be positive"):
        tau_spectral("circuit", 4, 4, 2, 0.5, multiplier=0)
    with pytest.raises(SpectralError):
        tau_spectral("circuit", 4, 4, 2, 1.0)


def test_spectral_report_keys():
    d = spectral_report(CircuitModel(complete(2)), 4).to_dict()
    assert set(d) == {"lambda", "diffusion_p", "p_min", "tau_spectral", "constant_multiplier"}
    assert d["lambda"] == pytest.approx(0, abs=1e-12) and d["tau_spectral"] >= 1


def test_worst_disc_examples():
    assert worst_discrepancy(np.eye(4), 1) == pytest.approx(1)
    assert worst_discrepancy(np.full((5, 5), 0.2), 7) == pytest.approx(0)
    assert worst_discrepancy(HALF, 10) == pytest.approx(0)


def test_worst_disc_matches_brute_force():
    # oracle: disc(x M) is convex in x, so the worst case over disc(x) <= K is
    # attained at a 0/K vertex of the box
    m = RandomMatchingModel(cycle(6), 1)
    M = window_product(m, 1, 7)
    K = 5.0
    best = 0.0
    for mask in range(1 << 6):
        x = np.array([(mask >> i) & 1 for i in range(6)]) * K
        y = x @ M
        best = max(best, y.max() - y.min())
    assert worst_discrepancy(M, K) == pytest.approx(best)


def test_global_event_examples():
    assert global_event(window_product(CircuitModel(complete(2)), 1, 1))
    assert not global_event(np.eye(6))


def test_goodness_pass_fraction_monotone_in_window():
    m = CircuitModel(hypercube(8))
    rep = check_goodness(m, [2, 4, 6, 8, 16], [8], start_rounds=range(8))
    assert rep.pass_global == sorted(rep.pass_global)
    assert rep.pass_global[-1] == 1.0 and rep.pass_global[0] == 0.0
    assert rep.tau_global_estimate == 8
    assert set(rep.to_dict()) == {"tau_global_estimate", "tau_local_estimate", "gamma_g_pass", "gamma_l_pass"}


def test_smoothing_prefix_consistent_with_check():
    m = CircuitModel(hypercube(6))
    n = 64
    t = smoothing_prefix(m, 100, 1 / (2 * n), 50)
    assert t == 6
    assert check_smoothing(m, t, 100, 1 / (2 * n)).passed
    assert not check_smoothing(m, t - 1, 100, 1 / (2 * n)).passed


def test_goodness_rounds_smooth_random_schedule():
    g = hypercube(4)
    n = g.n
    m = RandomMatchingModel(g)
    lam = schedule_lambda(m)
    tg, _ = goodness_windows("random_matching", n, g.max_degree, lam, m.p_min())
    K, eps = 2 * n * n, 1.0
    t_star = math.ceil(3 * math.log(K / eps) / math.log(n) * tg)
    ok = [check_smoothing(m, t_star, K, eps, seed=s).passed for s in range(20)]
    assert sum(ok) >= 19


models = st.sampled_from(["circuit", "random_matching", "async"])
graphs = st.sampled_from([hypercube(3), cycle(7), path(5), torus(3, 4), complete(6), star(5),
                          random_regular(14, 3, seed=2)])


@given(graphs, models, st.integers(0, 2**32), st.integers(1, 40), st.integers(0, 80))
def test_window_doubly_stochastic(g, kind, seed, t1, length):
    M = window_product(make_model(g, kind, seed), t1, t1 + length)
    assert is_doubly_stochastic(M, 1e-12)


@given(graphs, models, st.integers(0, 2**32))
def test_row_distance_identity_and_monotone(g, kind, seed):
    n = g.n
    P = np.eye(n)
    prev = row_dist2(P)
    for p in window_partners(make_model(g, kind, seed), 1, 60):
        P = 0.5 * (P + P[:, p])
        d = row_dist2(P)
        assert np.all(np.abs(d - (row_norm2(P) - 1 / n)) < 1e-12)
        assert np.all(d <= prev + 1e-12)
        prev = d


@given(graphs, st.integers(0, 2**32), st.integers(1, 60),
       st.floats(1, 1000), st.floats(0.01, 2))
def test_row_condition_implies_smoothing(g, seed, t, K, eps):
    M = window_product(RandomMatchingModel(g, seed), 1, t)
    if np.all(row_dist2(M) <= (eps / (2 * K * g.n)) ** 2):
        assert check_smoothing_matrix(M, K, eps).passed


@given(graphs, models, st.integers(0, 2**32), st.integers(1, 30))
def test_exact_window_matches_float(g, kind, seed, t):
    m = make_model(g, kind, seed)
    W = window_product(m, 1, t, exact=True)
    assert np.allclose(W.to_float(), window_product(m, 1, t), atol=1e-15)
