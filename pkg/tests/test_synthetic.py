import numpy as np
import pytest

from cohesion_gcl.cohesion import core_numbers
from cohesion_gcl.errors import ArgumentError
from cohesion_gcl.graph import validate_graph
from cohesion_gcl.synthetic import generate_synthetic


def test_planted_clique_properties():
    ds = generate_synthetic("planted-clique", 100, seed=0)
    assert np.bincount(ds.labels).tolist() == [50, 50]
    for g, y in zip(ds.graphs, ds.labels):
        assert validate_graph(g) == []
        if y == 1:
            assert core_numbers(g).k_max >= 4


def test_classes_matched_on_edge_count():
    ds = generate_synthetic("planted-clique", 40, seed=2)
    m = np.array([g.edge_count for g in ds.graphs])
    assert abs(m[ds.labels == 0].mean() - m[ds.labels == 1].mean()) < 0.25 * m.mean()


def test_deterministic_and_tiny():
    a, b = generate_synthetic("two-density", 10, 5), generate_synthetic("two-density", 10, 5)
    assert all(np.array_equal(g.edges, h.edges) for g, h in zip(a.graphs, b.graphs))
    tiny = generate_synthetic("planted-clique", 2, 1)
    assert list(tiny.labels) == [0, 1]


@pytest.mark.parametrize("kind, n", [("planted-clique", 3), ("planted-clique", 0), ("stars", 4)])
def test_bad_arguments(kind, n):
    with pytest.raises(ArgumentError):
        generate_synthetic(kind, n)
