"""k-core and k-truss decompositions and the node-count features built on them."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, EmptyError
from .graph import Graph

PROPERTIES = ("core", "truss")


@dataclass(frozen=True)
class CoreDecomposition:
    core_number: np.ndarray
    k_max: int


@dataclass(frozen=True)
class TrussDecomposition:
    truss_number: dict
    k_max: int

    def edge_array(self, g: Graph) -> np.ndarray:
        """Truss numbers aligned with ``g.edges``."""
        return np.array([self.truss_number[(int(u), int(v))] for u, v in g.edges], dtype=np.int64)


def core_numbers(g: Graph) -> CoreDecomposition:
    """Bucket-based peeling in O(n + m)."""
    n = g.node_count
    adj = g.neighbors()
    deg = np.array([len(a) for a in adj], dtype=np.int64)
    if n == 0:
        return CoreDecomposition(np.zeros(0, dtype=np.int64), 0)
    max_deg = int(deg.max())
    # nodes sorted by degree; pos/bin arrays as in Batagelj & Zaversnik
    bins = np.zeros(max_deg + 2, dtype=np.int64)
    for d in deg:
        bins[d + 1] += 1
    bins = np.cumsum(bins)[:-1].copy()
    order = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    fill = bins.copy()
    for v in range(n):
        pos[v] = fill[deg[v]]
        order[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = order[i]
        for u in adj[v]:
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = order[pw]
                if u != w:
                    order[pu], order[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bins[du] += 1
                deg[u] -= 1
    return CoreDecomposition(deg, int(deg.max()))


def truss_numbers(g: Graph) -> TrussDecomposition:
    """Support peeling; among minimum-support edges the smallest (u, v) goes first."""
    if g.edge_count == 0:
        raise EmptyError("truss decomposition needs at least one edge")
    adj = [set(nb) for nb in g.neighbors()]
    support = {}
    for u, v in g.edge_list():
        support[(u, v)] = len(adj[u] & adj[v])
    heap = [(s, e) for e, s in support.items()]
    heapq.heapify(heap)
    truss = {}
    level = 2
    while heap:
        s, e = heapq.heappop(heap)
        if e in truss or support[e] != s:
            continue
        level = max(level, s + 2)
        truss[e] = level
        u, v = e
        for w in adj[u] & adj[v]:
            for f in ((min(u, w), max(u, w)), (min(v, w), max(v, w))):
                support[f] -= 1
                heapq.heappush(heap, (support[f], f))
        adj[u].discard(v)
        adj[v].discard(u)
    return TrussDecomposition(truss, level if truss else 2)


def _check_property(prop: str):
    if prop not in PROPERTIES:
        raise ArgumentError(f"unknown cohesion property {prop!r}; expected core or truss")


def cohesive_node_set(g: Graph, prop: str, k: int, decomposition=None) -> set[int]:
    """Nodes of the k-core, or the endpoints of the k-truss edges."""
    _check_property(prop)
    if prop == "core":
        if k < 1:
            raise ArgumentError("k-core needs k >= 1")
        dec = decomposition or core_numbers(g)
        return {int(v) for v in np.flatnonzero(dec.core_number >= k)}
    if k < 2:
        raise ArgumentError("k-truss needs k >= 2")
    if g.edge_count == 0:
        return set()
    dec = decomposition or truss_numbers(g)
    nodes = set()
    for (u, v), t in dec.truss_number.items():
        if t >= k:
            nodes.update((u, v))
    return nodes


def decompose(g: Graph, prop: str):
    """Decomposition for ``prop``; ``None`` for the truss of an edgeless graph."""
    _check_property(prop)
    if prop == "core":
        return core_numbers(g)
    return truss_numbers(g) if g.edge_count else None


def node_level_counts(g: Graph, prop: str, decomposition=None) -> np.ndarray:
    """Per node, the largest k whose k-cohesive set contains it (0 if none).

    For cores this is the core number; for trusses it is the maximum truss
    number over incident edges.
    """
    _check_property(prop)
    dec = decomposition if decomposition is not None else decompose(g, prop)
    if prop == "core":
        return np.asarray(dec.core_number, dtype=np.int64)
    level = np.zeros(g.node_count, dtype=np.int64)
    if dec is None:
        return level
    for (u, v), t in dec.truss_number.items():
        level[u] = max(level[u], t)
        level[v] = max(level[v], t)
    return level


def cohesion_feature_vector(g: Graph, K: int, properties=("core",)) -> np.ndarray:
    """Node counts of the i-core (i=1..K) and i-truss (i=2..K+1) subgraphs.

    Blocks are emitted core first, then truss, whatever order ``properties``
    lists them in.
    """
    if K < 1:
        raise ArgumentError("K must be >= 1")
    for p in properties:
        _check_property(p)
    blocks = []
    for prop in PROPERTIES:
        if prop not in properties:
            continue
        level = node_level_counts(g, prop)
        ks = np.arange(1, K + 1) if prop == "core" else np.arange(2, K + 2)
        blocks.append(np.array([np.count_nonzero(level >= k) for k in ks], dtype=np.float64))
    return np.concatenate(blocks) if blocks else np.zeros(0)
