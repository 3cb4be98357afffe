import pytest
from hypothesis import given, strategies as st

from loadbal.graph import (
    GraphError, build_named, complete, cycle, edge_color, hypercube, load_graph,
    path, random_regular, save_graph, star, torus,
)


def test_hypercube_3():
    g = hypercube(3)
    assert (g.n, g.m, g.max_degree) == (8, 12, 3)


def test_cycle_4():
    g = cycle(4)
    assert (g.n, g.m, g.max_degree) == (4, 4, 2)


def test_complete_2():
    assert complete(2).edges == ((0, 1),)


def test_load_k2_and_p3():
    assert load_graph("2 1\n0 1").edges == ((0, 1),)
    p3 = load_graph("3 2\n0 1\n1 2")
    assert p3 == path(3)


def test_load_rejects_disconnected():
    with pytest.raises(GraphError, match="disconnected"):
        load_graph("4 2\n0 1\n2 3")


@pytest.mark.parametrize("text", ["2 1\n0 0", "2 2\n0 1\n1 0", "2 1\n0 5", "x y", "3 2\n0 1"])
def test_load_rejects_malformed(text):
    with pytest.raises(GraphError):
        load_graph(text)


def test_coloring_k2():
    assert edge_color(complete(2)).classes == (((0, 1),),)


def test_coloring_cycle4_two_perfect_matchings():
    # C4 has exactly one proper 2-colouring up to swapping colours
    classes = {frozenset(c) for c in edge_color(cycle(4)).classes}
    assert classes == {frozenset({(0, 1), (2, 3)}), frozenset({(0, 3), (1, 2)})}


def test_coloring_hypercube_is_dimension_exchange():
    col = edge_color(hypercube(3))
    assert col.width == 3
    for i, c in enumerate(col.classes):
        assert len(c) == 4 and all(u ^ v == 1 << i for u, v in c)


def test_random_regular_deterministic():
    a = random_regular(20, 3, seed=5)
    b = random_regular(20, 3, seed=5)
    assert a.edges == b.edges
    assert set(a.degrees().tolist()) == {3}


def test_random_regular_large():
    g = random_regular(512, 8, seed=0)
    assert g.m == 512 * 4 and g.is_connected()


def test_build_named_errors():
    with pytest.raises(GraphError, match="unknown family"):
        build_named("lattice", n=3)
    with pytest.raises(GraphError, match="requires"):
        build_named("torus", a=3)


graphs = st.one_of(
    st.integers(1, 6).map(hypercube),
    st.integers(3, 30).map(cycle),
    st.integers(2, 30).map(path),
    st.tuples(st.integers(3, 7), st.integers(3, 7)).map(lambda ab: torus(*ab)),
    st.integers(2, 12).map(complete),
    st.integers(1, 10).map(star),
    st.tuples(st.integers(2, 20), st.integers(2, 5), st.integers(0, 1000))
      .filter(lambda t: t[0] * t[1] % 2 == 0 and t[1] < t[0])
      .map(lambda t: random_regular(*t)),
)


@given(graphs)
def test_generated_graphs_connected(g):
    assert g.bfs_reach(0) == g.n


@given(graphs)
def test_coloring_is_proper_cover(g):
    col = edge_color(g)
    col.validate(g)
    assert sorted(e for c in col.classes for e in c) == sorted(g.edges)
    assert col.width <= max(1, 2 * g.max_degree - 1)


@given(graphs)
def test_edge_list_roundtrip(g):
    assert load_graph(save_graph(g)) == g
