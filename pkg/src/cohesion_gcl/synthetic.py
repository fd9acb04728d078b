"""Small synthetic graph-classification datasets."""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .graph import Graph, GraphDataset

KINDS = ("planted-clique", "two-density")


def _random_edges(rng, n: int, m: int) -> set:
    """``m`` distinct uniformly random edges on ``n`` nodes."""
    m = min(m, n * (n - 1) // 2)
    edges = set()
    while len(edges) < m:
        u, v = rng.choice(n, size=2, replace=False)
        edges.add((int(min(u, v)), int(max(u, v))))
    return edges


def _gnp_edges(rng, n: int, p: float) -> set:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return {(int(a), int(b)) for a, b in zip(iu[keep], ju[keep])}


def generate_synthetic(kind: str = "planted-clique", n_graphs: int = 100, seed: int = 0,
                       min_nodes: int = 16, max_nodes: int = 28, mean_degree: float = 3.0) -> GraphDataset:
    """Balanced two-class dataset; labels alternate 0, 1, 0, 1, ...

    ``planted-clique``: class 1 is a sparse G(n, p) graph with a 5..7 clique
    planted on random nodes, class 0 a uniform random graph on the same number
    of nodes and edges. ``two-density``: G(n, p) graphs whose mean degree is
    ``mean_degree`` (class 0) or twice that (class 1).
    """
    if kind not in KINDS:
        raise ArgumentError(f"kind must be one of {KINDS}")
    if n_graphs < 2 or n_graphs % 2:
        raise ArgumentError("n_graphs must be even and >= 2")
    rng = np.random.default_rng([int(seed), 0x7379])
    graphs, labels = [], []
    for i in range(n_graphs):
        label = i % 2
        n = int(rng.integers(min_nodes, max_nodes + 1))
        p = mean_degree / (n - 1)
        if kind == "planted-clique":
            size = int(rng.integers(5, 8))
            edges = _gnp_edges(rng, n, p)
            clique = sorted(int(v) for v in rng.choice(n, size=size, replace=False))
            planted = edges | {(a, b) for j, a in enumerate(clique) for b in clique[j + 1 :]}
            edges = planted if label == 1 else _random_edges(rng, n, len(planted))
        else:
            edges = _gnp_edges(rng, n, p * (2 if label else 1))
        graphs.append(Graph.from_edges(n, sorted(edges)))
        labels.append(label)
    return GraphDataset(f"synthetic-{kind}-{n_graphs}-{seed}", graphs, labels, 2, {0: 0, 1: 1})
