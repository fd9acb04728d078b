"""Cohesion-guided topology augmentation.

Two enhancers live here. The probabilistic one lowers node/edge drop
probabilities inside cohesive subgraphs; the deterministic one reweights
edges by cohesion before a personalized-PageRank diffusion.

All randomness comes from ``numpy`` generators seeded with the tuple
``(seed, graph_index, draw_index)``; element ``i`` of a draw always uses the
``i``-th uniform of that stream, so results do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cohesion import PROPERTIES, cohesive_node_set, decompose, node_level_counts
from .errors import ArgumentError, EmptyError
from .graph import Graph, induced_subgraph

F_KINDS = {
    "linear": lambda x: x,
    "sqrt": np.sqrt,
    "square": np.square,
}


@dataclass(frozen=True)
class ImportanceWeights:
    mode: str
    values: np.ndarray
    normalizer_used: float


@dataclass(frozen=True)
class DropPlan:
    node_drop_prob: np.ndarray
    edge_drop_prob: np.ndarray
    base_p_dr: float
    epsilon: float
    f_kind: str


@dataclass(frozen=True)
class DiffusionMatrix:
    matrix: np.ndarray
    alpha: float


def draw_uniforms(seed: int, graph_index: int, draw_index: int, size: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), int(graph_index), int(draw_index)])
    return rng.random(size)


def _membership_counts(g: Graph, prop: str, k_lo: int) -> tuple[np.ndarray, int]:
    """How many of the k-cohesive sets, k = k_lo..k_max, contain each node."""
    dec = decompose(g, prop)
    if dec is None:
        return np.zeros(g.node_count), 0
    level = node_level_counts(g, prop, dec)
    return np.clip(level - k_lo + 1, 0, None).astype(np.float64), dec.k_max


def _k_floor(prop: str) -> int:
    return 1 if prop == "core" else 2


def vertex_importance_prob(g: Graph, prop: str) -> ImportanceWeights:
    """Max-normalized membership counts over the top three cohesion levels."""
    if prop not in PROPERTIES:
        raise ArgumentError(f"unknown property {prop!r}")
    dec = decompose(g, prop)
    k_max = 0 if dec is None else dec.k_max
    k_min = max(k_max - 2, _k_floor(prop))
    raw, _ = _membership_counts(g, prop, k_min)
    top = raw.max() if raw.size else 0.0
    values = raw / top if top > 0 else np.zeros_like(raw)
    return ImportanceWeights("probabilistic", values, float(top))


def vertex_importance_det(g: Graph, prop: str) -> ImportanceWeights:
    """Raw membership counts over every cohesion level; ``normalizer_used`` is their mean."""
    if prop not in PROPERTIES:
        raise ArgumentError(f"unknown property {prop!r}")
    raw, _ = _membership_counts(g, prop, _k_floor(prop))
    mean = float(raw.mean()) if raw.size else 0.0
    return ImportanceWeights("deterministic", raw, mean)


def refined_drop_plan(g: Graph, w: ImportanceWeights, p_dr: float = 0.2, eps: float = 0.2,
                      f_kind: str = "square") -> DropPlan:
    """Node drop probability ``(1 - f(w') * eps) * p_dr``; edges take the endpoint mean.

    ``eps = 0`` is accepted and yields the uniform plan.
    """
    if not 0.0 < p_dr < 1.0:
        raise ArgumentError(f"p_dr must lie in (0, 1), got {p_dr}")
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"eps must lie in [0, 1], got {eps}")
    if f_kind not in F_KINDS:
        raise ArgumentError(f"f_kind must be one of {sorted(F_KINDS)}")
    if w.mode != "probabilistic":
        raise ArgumentError("refined_drop_plan needs probabilistic importance weights")
    node = (1.0 - F_KINDS[f_kind](np.asarray(w.values, dtype=np.float64)) * eps) * p_dr
    return DropPlan(node, _edge_probs(g, node), p_dr, eps, f_kind)


def uniform_plan(g: Graph, p: float) -> DropPlan:
    node = np.full(g.node_count, float(p))
    return DropPlan(node, _edge_probs(g, node), float(p), 0.0, "linear")


def constant_plan(g: Graph, node_p: float, edge_p: float | None = None) -> DropPlan:
    """Plan with fixed probabilities (any value in [0, 1]); mostly for tests."""
    node = np.full(g.node_count, float(node_p))
    edge = _edge_probs(g, node) if edge_p is None else np.full(g.edge_count, float(edge_p))
    return DropPlan(node, edge, float(node_p), 0.0, "linear")


def _edge_probs(g: Graph, node: np.ndarray) -> np.ndarray:
    if g.edge_count == 0:
        return np.zeros(0)
    return (node[g.edges[:, 0]] + node[g.edges[:, 1]]) / 2.0


def node_keep_mask(plan: DropPlan, uniforms: np.ndarray) -> np.ndarray:
    probs = plan.node_drop_prob
    keep = uniforms >= probs
    if probs.size and not keep.any():
        keep[int(np.argmin(probs))] = True
    return keep


def sample_node_drop(g: Graph, plan: DropPlan, seed: int, graph_index: int = 0, draw_index: int = 0,
                     return_mapping: bool = False):
    """Drop each node independently; the survivors' induced subgraph is returned.

    If every node would be dropped, the node with the lowest drop probability
    (lowest index on ties) is kept.
    """
    u = draw_uniforms(seed, graph_index, draw_index, g.node_count)
    keep = node_keep_mask(plan, u)
    sub, mapping = induced_subgraph(g, np.flatnonzero(keep))
    return (sub, mapping) if return_mapping else sub


def sample_edge_drop(g: Graph, plan: DropPlan, seed: int, graph_index: int = 0, draw_index: int = 0) -> Graph:
    """Drop each edge independently; all nodes stay."""
    u = draw_uniforms(seed, graph_index, draw_index, g.edge_count)
    keep = u >= plan.edge_drop_prob
    return Graph(g.node_count, g.edges[keep], g.edge_weights[keep], g.node_features)


def reweight_edges(g: Graph, w_raw: ImportanceWeights, eta: float) -> Graph:
    """Scale each edge weight by the mean of its endpoints' mixed importance."""
    if not 0.0 <= eta <= 1.0:
        raise ArgumentError(f"eta must lie in [0, 1], got {eta}")
    if g.edge_count == 0:
        raise EmptyError("reweighting needs at least one edge")
    node = mixed_node_weights(w_raw, eta)
    factor = (node[g.edges[:, 0]] + node[g.edges[:, 1]]) / 2.0
    return g.with_weights(factor * g.edge_weights)


def mixed_node_weights(w_raw: ImportanceWeights, eta: float) -> np.ndarray:
    values = np.asarray(w_raw.values, dtype=np.float64)
    mean = values.mean()
    if mean <= 0:
        raise EmptyError("importance weights are all zero")
    return eta * values / mean + (1.0 - eta)


def transition_matrix(g: Graph) -> np.ndarray:
    """Symmetric normalization D^-1/2 A D^-1/2 of the weighted adjacency."""
    a = g.adjacency(weighted=True)
    deg = a.sum(axis=1)
    if np.any(deg <= 0):
        raise ArgumentError("diffusion needs every node to have positive weighted degree")
    inv_sqrt = 1.0 / np.sqrt(deg)
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


def ppr_diffusion(g: Graph, alpha: float) -> DiffusionMatrix:
    """Closed-form PPR diffusion ``alpha * (I - (1 - alpha) T)^-1``."""
    if not 0.0 < alpha <= 1.0:
        raise ArgumentError(f"alpha must lie in (0, 1], got {alpha}")
    t = transition_matrix(g)
    n = g.node_count
    eye = np.eye(n)
    s = np.linalg.solve(eye - (1.0 - alpha) * t, alpha * eye)
    return DiffusionMatrix(s, float(alpha))


def diffusion_residual(g: Graph, d: DiffusionMatrix) -> float:
    t = transition_matrix(g)
    eye = np.eye(g.node_count)
    return float(np.abs((eye - (1.0 - d.alpha) * t) @ d.matrix - d.alpha * eye).max())


def main_cohesive_set(g: Graph, prop: str) -> set[int]:
    dec = decompose(g, prop)
    if dec is None or dec.k_max < _k_floor(prop):
        return set()
    return cohesive_node_set(g, prop, dec.k_max, dec)


def preservation_ratio(g: Graph, plan: DropPlan, prop: str, samples: int, seed: int,
                       graph_index: int = 0) -> float:
    """Mean fraction of main-cohesive-subgraph nodes that survive a node-drop draw."""
    if samples < 1:
        raise ArgumentError("samples must be >= 1")
    members = np.array(sorted(main_cohesive_set(g, prop)), dtype=np.int64)
    if members.size == 0:
        raise EmptyError(f"graph has an empty main {prop} subgraph")
    total = 0.0
    for draw in range(samples):
        keep = node_keep_mask(plan, draw_uniforms(seed, graph_index, draw, g.node_count))
        total += keep[members].mean()
    return total / samples
