"""Brute-force reference implementations, deliberately naive."""

from itertools import combinations

import numpy as np


def naive_core_numbers(n, edges):
    """Core number = largest k whose repeated-deletion survivor set holds the node."""
    core = [0] * n
    k = 1
    while True:
        alive = set(range(n))
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                deg = sum(1 for a, b in edges if (a == v and b in alive) or (b == v and a in alive))
                if deg < k:
                    alive.discard(v)
                    changed = True
        if not alive:
            return core
        for v in alive:
            core[v] = k
        k += 1


def naive_truss_numbers(edges):
    """Truss number = largest k such that the edge survives deleting edges in < k-2 triangles."""
    edges = [tuple(sorted(e)) for e in edges]
    truss = {e: 2 for e in edges}
    k = 3
    while True:
        alive = set(edges)
        changed = True
        while changed:
            changed = False
            for (u, v) in list(alive):
                nu = {b if a == u else a for a, b in alive if u in (a, b)}
                nv = {b if a == v else a for a, b in alive if v in (a, b)}
                if len(nu & nv) < k - 2:
                    alive.discard((u, v))
                    changed = True
        if not alive:
            return truss
        for e in alive:
            truss[e] = k
        k += 1


def brute_clique_counts(n, edges, sizes):
    es = {tuple(sorted(e)) for e in edges}
    out = np.zeros((n, len(sizes)), dtype=np.int64)
    for j, k in enumerate(sizes):
        for sub in combinations(range(n), k):
            if all((a, b) in es for a, b in combinations(sub, 2)):
                out[list(sub), j] += 1
    return out


def series_ppr(adjacency, alpha, terms=4000):
    """alpha * sum_t ((1 - alpha) T)^t by power iteration."""
    deg = adjacency.sum(axis=1)
    t = adjacency / np.sqrt(np.outer(deg, deg))
    acc = np.eye(len(adjacency))
    term = np.eye(len(adjacency))
    for _ in range(terms):
        term = (1 - alpha) * t @ term
        acc = acc + term
    return alpha * acc
