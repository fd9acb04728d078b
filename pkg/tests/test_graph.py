import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cohesion_gcl.errors import ArgumentError, FormatError, ParseError
from cohesion_gcl.graph import (
    Graph,
    GraphDataset,
    degree_one_hot,
    format_native,
    induced_subgraph,
    load_tu_dataset,
    parse_native,
    validate_graph,
    write_tu_dataset,
)

from conftest import complete


def write_tu(tmp_path, name, a, indicator, labels, node_labels=None):
    (tmp_path / f"{name}_A.txt").write_text(a)
    (tmp_path / f"{name}_graph_indicator.txt").write_text(indicator)
    (tmp_path / f"{name}_graph_labels.txt").write_text(labels)
    if node_labels is not None:
        (tmp_path / f"{name}_node_labels.txt").write_text(node_labels)


@pytest.fixture
def tiny_tu(tmp_path):
    # graph 1: triangle (nodes 1-3), graph 2: path 4-5-6; edges listed both ways
    a = "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n5, 6\n6, 5\n"
    write_tu(tmp_path, "TINY", a, "1\n1\n1\n2\n2\n2\n", "1\n2\n")
    return tmp_path


def test_load_hand_written_fixture(tiny_tu):
    ds = load_tu_dataset(tiny_tu, "TINY")
    assert [g.node_count for g in ds.graphs] == [3, 3]
    assert list(ds.labels) == [0, 1]
    assert ds.class_count == 2
    assert ds.label_mapping == {1: 0, 2: 1}
    assert ds.graphs[0].edge_list() == [(0, 1), (1, 2), (0, 2)]
    assert ds.graphs[1].edge_list() == [(0, 1), (1, 2)]
    # unattributed graphs get a constant feature
    assert np.array_equal(ds.graphs[0].node_features, np.ones((3, 1)))


def test_single_listed_edges_accepted(tmp_path):
    write_tu(tmp_path, "S", "1, 2\n2, 3\n", "1\n1\n1\n", "5\n")
    ds = load_tu_dataset(tmp_path, "S")
    assert ds.graphs[0].edge_list() == [(0, 1), (1, 2)]
    assert list(ds.labels) == [0]


def test_node_labels_one_hot(tmp_path):
    write_tu(tmp_path, "N", "1, 2\n", "1\n1\n", "0\n", node_labels="3\n7\n")
    g = load_tu_dataset(tmp_path, "N").graphs[0]
    assert np.array_equal(g.node_features, [[1, 0], [0, 1]])


def test_edge_crossing_graphs(tmp_path):
    write_tu(tmp_path, "X", "1, 2\n", "1\n2\n", "0\n1\n")
    with pytest.raises(FormatError):
        load_tu_dataset(tmp_path, "X")


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load_tu_dataset(tmp_path, "NOPE")


def test_non_integer_token(tmp_path):
    write_tu(tmp_path, "P", "1, b\n", "1\n1\n", "0\n")
    with pytest.raises(ParseError):
        load_tu_dataset(tmp_path, "P")


def test_empty_edge_file(tmp_path):
    write_tu(tmp_path, "E", "", "1\n", "0\n")
    ds = load_tu_dataset(tmp_path, "E")
    assert len(ds) == 1 and ds.graphs[0].node_count == 1 and ds.graphs[0].edge_count == 0


def test_roundtrip_fixed_point(tiny_tu, tmp_path):
    ds = load_tu_dataset(tiny_tu, "TINY")
    out = tmp_path / "again"
    write_tu_dataset(ds, out, "TINY")
    ds2 = load_tu_dataset(out, "TINY")
    for g, h in zip(ds.graphs, ds2.graphs):
        assert g.node_count == h.node_count
        assert np.array_equal(g.edges, h.edges)
        assert np.array_equal(g.node_features, h.node_features)
    assert np.array_equal(ds.labels, ds2.labels)
    assert ds.label_mapping == ds2.label_mapping


def test_roundtrip_with_node_labels(tmp_path):
    write_tu(tmp_path, "N", "1, 2\n2, 3\n", "1\n1\n2\n", "0\n1\n", node_labels="0\n1\n2\n")
    with pytest.raises(FormatError):
        load_tu_dataset(tmp_path, "N")  # edge 2-3 crosses graphs
    write_tu(tmp_path, "N", "1, 2\n", "1\n1\n2\n", "0\n1\n", node_labels="0\n1\n2\n")
    ds = load_tu_dataset(tmp_path, "N")
    write_tu_dataset(ds, tmp_path / "o")
    ds2 = load_tu_dataset(tmp_path / "o", "N")
    for g, h in zip(ds.graphs, ds2.graphs):
        assert np.array_equal(g.node_features, h.node_features)


@pytest.mark.parametrize(
    "graph, expected",
    [
        (complete(3), []),
        (Graph(1, [(0, 0)], [1.0]), ["self-loop at 0"]),
        (Graph(2, [(0, 5)], [1.0]), ["endpoint out of range: (0,5)"]),
    ],
)
def test_validate_examples(graph, expected):
    assert validate_graph(graph) == expected


def test_validate_other_violations():
    assert any("duplicate" in p for p in validate_graph(Graph(3, [(0, 1), (1, 0)], [1, 1])))
    assert any("negative" in p for p in validate_graph(Graph(2, [(0, 1)], [-1.0])))
    assert any("length" in p for p in validate_graph(Graph(2, [(0, 1)], [1.0, 2.0])))
    assert any("row count" in p for p in validate_graph(Graph(2, [(0, 1)], [1.0], np.ones((3, 1)))))


def test_induced_subgraph_examples(k4, bowtie):
    sub, mapping = induced_subgraph(k4, {0, 1, 2})
    assert sub.node_count == 3 and sub.edge_count == 3
    assert list(mapping) == [0, 1, 2]
    sub, mapping = induced_subgraph(bowtie, {0, 1, 3})
    assert sub.node_count == 3 and sub.edge_list() == [(0, 1)]
    assert list(mapping) == [0, 1, 3]
    with pytest.raises(ArgumentError):
        induced_subgraph(k4, {7})


def test_induced_carries_weights_and_features():
    g = Graph.from_edges(3, [(0, 1), (1, 2)], [2.0, 3.0], node_features=np.arange(3.0))
    sub, mapping = induced_subgraph(g, [1, 2])
    assert sub.edge_list() == [(0, 1)] and list(sub.edge_weights) == [3.0]
    assert list(sub.node_features[:, 0]) == [1.0, 2.0]


graphs_st = st.integers(1, 9).flatmap(
    lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1])).map(
        lambda es: Graph.from_edges(n, sorted(es))
    )
)


@given(graphs_st)
def test_induced_on_all_nodes_is_identity(g):
    sub, mapping = induced_subgraph(g, range(g.node_count))
    assert np.array_equal(sub.edges, g.edges) and list(mapping) == list(range(g.node_count))


@given(graphs_st, st.data())
@settings(max_examples=50)
def test_induced_is_monotone(g, data):
    t = data.draw(st.sets(st.integers(0, g.node_count - 1)))
    s = data.draw(st.sets(st.sampled_from(sorted(t)))) if t else set()
    assert induced_subgraph(g, s)[0].edge_count <= induced_subgraph(g, t)[0].edge_count


def test_native_format_roundtrip(bowtie):
    g = bowtie.with_weights(np.linspace(0.5, 3.0, bowtie.edge_count))
    (back,) = parse_native(format_native(g))
    assert back.node_count == g.node_count
    assert np.array_equal(back.edges, g.edges) and np.allclose(back.edge_weights, g.edge_weights)
    two = parse_native("# two graphs\n2 1\n0 1\n\n3 0\n")
    assert [h.node_count for h in two] == [2, 3]


def test_native_format_errors():
    with pytest.raises(FormatError):
        parse_native("3 2\n0 1\n")
    with pytest.raises(ParseError):
        parse_native("3 1\n0 x\n")


def test_degree_one_hot(path3):
    ds = GraphDataset("p", [path3], [0], 1)
    feats = degree_one_hot(ds).graphs[0].node_features
    assert np.array_equal(feats, [[0, 1, 0], [0, 0, 1], [0, 1, 0]])


def test_graph_is_immutable(k4):
    with pytest.raises(ValueError):
        k4.edges[0, 0] = 3
