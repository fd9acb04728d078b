import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cohesion_gcl.cohesion import (
    cohesion_feature_vector,
    cohesive_node_set,
    core_numbers,
    truss_numbers,
)
from cohesion_gcl.errors import ArgumentError, EmptyError
from cohesion_gcl.graph import Graph

from conftest import complete, cycle, random_graph
from oracles import naive_core_numbers, naive_truss_numbers


def test_core_examples(k4, path3, bowtie):
    assert list(core_numbers(k4).core_number) == [3, 3, 3, 3] and core_numbers(k4).k_max == 3
    assert list(core_numbers(path3).core_number) == [1, 1, 1] and core_numbers(path3).k_max == 1
    # bowtie value from the repeated-deletion oracle
    assert list(core_numbers(bowtie).core_number) == [2, 2, 2, 2, 2]


def test_core_edgeless():
    dec = core_numbers(Graph.from_edges(3))
    assert list(dec.core_number) == [0, 0, 0] and dec.k_max == 0


def test_truss_examples(k4, path3, bowtie):
    dec = truss_numbers(k4)
    assert set(dec.truss_number.values()) == {4} and dec.k_max == 4
    assert set(truss_numbers(path3).truss_number.values()) == {2}
    dec = truss_numbers(bowtie)
    assert len(dec.truss_number) == 6 and set(dec.truss_number.values()) == {3}


def test_truss_edgeless_rejected():
    with pytest.raises(EmptyError):
        truss_numbers(Graph.from_edges(2))


def test_cohesive_node_set_examples(k4, triangle_pendant, bowtie):
    assert cohesive_node_set(k4, "core", 3) == {0, 1, 2, 3}
    assert cohesive_node_set(triangle_pendant, "core", 2) == {0, 1, 2}
    assert cohesive_node_set(bowtie, "truss", 4) == set()
    assert cohesive_node_set(k4, "core", 9) == set()
    with pytest.raises(ArgumentError):
        cohesive_node_set(k4, "core", 0)
    with pytest.raises(ArgumentError):
        cohesive_node_set(k4, "truss", 1)
    with pytest.raises(ArgumentError):
        cohesive_node_set(k4, "clique", 2)


def test_feature_vector_examples(k4, triangle_pendant, path3):
    assert list(cohesion_feature_vector(k4, 4, ("core",))) == [4, 4, 4, 0]
    assert list(cohesion_feature_vector(triangle_pendant, 3, ("core",))) == [4, 3, 0]
    assert list(cohesion_feature_vector(path3, 2, ("core", "truss"))) == [3, 0, 3, 0]
    # block order is fixed: core first
    assert list(cohesion_feature_vector(path3, 2, ("truss", "core"))) == [3, 0, 3, 0]
    assert list(cohesion_feature_vector(Graph.from_edges(2), 2, ("truss",))) == [0, 0]


@pytest.mark.parametrize("k", range(3, 8))
def test_clique_cycle_tree_facts(k):
    kc = complete(k)
    assert set(core_numbers(kc).core_number) == {k - 1}
    assert set(truss_numbers(kc).truss_number.values()) == {k}
    assert set(core_numbers(cycle(k)).core_number) == {2}
    star = Graph.from_edges(k, [(0, i) for i in range(1, k)])
    assert set(core_numbers(star).core_number) == {1}


def _match_oracle(g):
    assert list(core_numbers(g).core_number) == naive_core_numbers(g.node_count, g.edge_list())
    if g.edge_count:
        assert truss_numbers(g).truss_number == naive_truss_numbers(g.edge_list())


def test_random_graphs_match_oracle():
    rng = np.random.default_rng(7)
    for _ in range(60):
        _match_oracle(random_graph(rng, int(rng.integers(2, 16)), rng.uniform(0.1, 0.7)))


def test_node_order_independent(rng):
    g = random_graph(rng, 14, 0.4)
    perm = rng.permutation(14)
    h = g.relabel(perm)
    assert np.array_equal(core_numbers(h).core_number[perm], core_numbers(g).core_number)
    th = truss_numbers(h).truss_number
    for (u, v), t in truss_numbers(g).truss_number.items():
        a, b = sorted((perm[u], perm[v]))
        assert th[(a, b)] == t


graph_st = st.integers(2, 10).flatmap(
    lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]),
                      min_size=1).map(lambda es: Graph.from_edges(n, sorted(es)))
)


@given(graph_st)
@settings(max_examples=60)
def test_nesting(g):
    for prop, lo in (("core", 1), ("truss", 2)):
        for k in range(lo, 12):
            assert cohesive_node_set(g, prop, k + 1) <= cohesive_node_set(g, prop, k)


@given(graph_st, st.data())
@settings(max_examples=60)
def test_adding_an_edge_never_lowers_cohesion(g, data):
    missing = [e for e in itertools.combinations(range(g.node_count), 2) if e not in set(g.edge_list())]
    if not missing:
        return
    e = data.draw(st.sampled_from(missing))
    h = Graph.from_edges(g.node_count, g.edge_list() + [e])
    assert np.all(core_numbers(h).core_number >= core_numbers(g).core_number)
    th = truss_numbers(h).truss_number
    assert all(th[k] >= t for k, t in truss_numbers(g).truss_number.items())
