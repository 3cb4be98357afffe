import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from loadbal.analysis.oracles import (
    OracleBudgetError, OracleInstance, connected_graphs, enumerate_final, evaluate_instance,
    exhaustive_family, family_instances, na_oracle, placements, walk_law_oracle,
)
from loadbal.graph import complete, cycle, path
from loadbal.tokens import TokenState, apply_pair


def _brute_final(stacks0, rounds):
    # oracle: one pair at a time, all bit strings, Fraction weights
    law = {tuple(map(tuple, stacks0)): Fraction(1)}
    for r in rounds:
        for u, v in r:
            new = {}
            for st_, w in law.items():
                s = len(st_[u]) + len(st_[v])
                c = s // 2 + (s & 1)
                for bits in itertools.product([False, True], repeat=c):
                    stacks = [list(x) for x in st_]
                    apply_pair(stacks, u, v, list(bits[:s // 2]), bool(s & 1) and bits[-1])
                    k = tuple(map(tuple, stacks))
                    new[k] = new.get(k, 0) + w / 2 ** c
            law = new
    return law


def test_connected_graph_counts():
    assert [len(connected_graphs(n)) for n in range(1, 5)] == [1, 1, 4, 38]


def test_k2_two_tokens_example():
    inst = OracleInstance(complete(2), [(0, 1)], TokenState([[1, 2], []]), frozenset({1, 2}), frozenset({1}))
    res = na_oracle(inst)
    assert res.joint == 0 and res.product == Fraction(1, 4) and res.passed


def test_singleton_law_equals_product():
    inst = OracleInstance(path(3), [(0, 1), (1, 2)], TokenState([[1, 2], [3], []]),
                          frozenset({2}), frozenset({1, 2}))
    res = na_oracle(inst)
    assert res.joint == res.product


def test_full_target_set():
    inst = OracleInstance(cycle(3), [(0, 1), (1, 2), (0, 2)], TokenState([[1, 2, 3], [], [4]]),
                          frozenset({1, 3, 4}), frozenset({0, 1, 2}))
    res = na_oracle(inst)
    assert res.joint == res.product == 1


def test_walk_law_examples():
    inst = OracleInstance(complete(2), [(0, 1)], TokenState([[1], []]))
    assert walk_law_oracle(inst, 1).distribution == (Fraction(1, 2), Fraction(1, 2))
    inst = OracleInstance(path(3), [], TokenState([[1], [], []]))
    assert walk_law_oracle(inst, 1).distribution == (1, 0, 0)
    inst = OracleInstance(path(3), [(0, 1), (1, 2)], TokenState([[1], [], []]))
    res = walk_law_oracle(inst, 1)
    assert res.distribution == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)) and res.equal


def test_budget_guard():
    with pytest.raises(OracleBudgetError):
        OracleInstance(complete(2), [(0, 1)] * 10, TokenState.from_loads([6, 0]))


def test_rejects_non_edge():
    with pytest.raises(ValueError):
        OracleInstance(path(3), [(0, 2)], TokenState.from_loads([1, 0, 0]))


instances = st.sampled_from(list(family_instances(3, 3, 4)))


@given(instances)
def test_enumeration_matches_brute_force(inst):
    g, rounds, loads = inst
    stacks0 = TokenState.from_loads(loads).stacks
    law, S = enumerate_final(stacks0, rounds)
    got = {k: Fraction(w, 2 ** S) for k, w in law.items()}
    assert got == _brute_final(stacks0, rounds)


@given(instances, st.data())
def test_fast_verdict_matches_direct_oracle(inst, data):
    g, rounds, loads = inst
    state = TokenState.from_loads(loads)
    tokens = [t for s in state.stacks for t in s]
    B = frozenset(data.draw(st.sets(st.sampled_from(tokens))) if tokens else set())
    D = frozenset(data.draw(st.sets(st.sampled_from(range(g.n)))))
    direct = na_oracle(OracleInstance(g, rounds, state, B, D))
    verdict = evaluate_instance(g.n, rounds, loads)
    mask = sum(1 << (t - 1) for t in B)
    dmask = sum(1 << v for v in D)
    assert ((mask, dmask) in verdict.na_failures) == (not direct.passed)
    assert direct.passed


def test_small_family_passes():
    rep = exhaustive_family(3, 2, 3)
    assert rep.na_pass and rep.walk_pass and rep.instances > 0
    assert rep.to_dict()["exceptions"] == 0


def test_placements_cover_all_load_vectors():
    got = set(placements(3, 2))
    want = {x for x in itertools.product(range(3), repeat=3) if sum(x) <= 2}
    assert got == want
