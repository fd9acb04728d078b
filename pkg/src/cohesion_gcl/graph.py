"""Undirected simple graphs, TU-format datasets and the native text format."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, FormatError, ParseError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """An undirected graph on nodes ``0..node_count-1``.

    The constructor does not enforce the simple-graph invariants so that
    :func:`validate_graph` can report them; use :meth:`from_edges` to build a
    graph from arbitrary input and get canonical ``u < v`` edge pairs.
    """

    node_count: int
    edges: np.ndarray
    edge_weights: np.ndarray
    node_features: np.ndarray | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.edge_weights, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(self, "edges", _frozen(edges.copy()))
        object.__setattr__(self, "edge_weights", _frozen(weights.copy()))
        if self.node_features is not None:
            feats = np.asarray(self.node_features, dtype=np.float64)
            if feats.ndim == 1:
                feats = feats[:, None]
            object.__setattr__(self, "node_features", _frozen(feats.copy()))

    @classmethod
    def from_edges(cls, node_count, edges=(), weights=None, node_features=None) -> "Graph":
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        e = np.sort(e, axis=1)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(node_count, e, w, node_features)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edges]

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(int(v))
            adj[v].append(int(u))
        for nb in adj:
            nb.sort()
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency(self, weighted: bool = True) -> np.ndarray:
        """Dense symmetric adjacency matrix."""
        a = np.zeros((self.node_count, self.node_count))
        w = self.edge_weights if weighted else np.ones(self.edge_count)
        a[self.edges[:, 0], self.edges[:, 1]] = w
        a[self.edges[:, 1], self.edges[:, 0]] = w
        return a

    def with_weights(self, weights) -> "Graph":
        return Graph(self.node_count, self.edges, weights, self.node_features)

    def with_features(self, features) -> "Graph":
        return Graph(self.node_count, self.edges, self.edge_weights, features)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        feats = None
        if self.node_features is not None:
            feats = np.empty_like(self.node_features)
            feats[perm] = self.node_features
        return Graph.from_edges(self.node_count, perm[self.edges], self.edge_weights, feats)

    def __repr__(self):
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


@dataclass(frozen=True, eq=False)
class GraphDataset:
    name: str
    graphs: tuple
    labels: np.ndarray
    class_count: int
    label_mapping: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        labels = _frozen(np.asarray(self.labels, dtype=np.int64).copy())
        object.__setattr__(self, "labels", labels)
        if len(labels) != len(self.graphs):
            raise ArgumentError("labels and graphs differ in length")
        if self.class_count < 1 or (len(labels) and (labels.min() < 0 or labels.max() >= self.class_count)):
            raise ArgumentError("labels must lie in [0, class_count)")

    def __len__(self):
        return len(self.graphs)


def validate_graph(g: Graph) -> list[str]:
    """List every violated Graph invariant; an empty list means valid."""
    problems = []
    seen = set()
    for u, v in g.edges:
        u, v = int(u), int(v)
        if u == v:
            problems.append(f"self-loop at {u}")
        if not (0 <= u < g.node_count and 0 <= v < g.node_count):
            problems.append(f"endpoint out of range: ({u},{v})")
        key = (min(u, v), max(u, v))
        if key in seen and u != v:
            problems.append(f"duplicate edge ({key[0]},{key[1]})")
        seen.add(key)
    if len(g.edge_weights) != len(g.edges):
        problems.append("edge_weights length differs from edges length")
    elif np.any(g.edge_weights < 0) or not np.all(np.isfinite(g.edge_weights)):
        problems.append("negative or non-finite edge weight")
    if g.node_features is not None and g.node_features.shape[0] != g.node_count:
        problems.append("node_features row count differs from node_count")
    return problems


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> tuple[Graph, np.ndarray]:
    """Node-induced subgraph plus the new-index -> old-index mapping.

    Nodes are re-indexed in ascending order of their original index.
    """
    keep = np.unique(np.fromiter((int(v) for v in nodes), dtype=np.int64))
    if len(keep) and (keep[0] < 0 or keep[-1] >= g.node_count):
        raise ArgumentError("node index out of range")
    new_index = np.full(g.node_count, -1, dtype=np.int64)
    new_index[keep] = np.arange(len(keep))
    mask = (new_index[g.edges[:, 0]] >= 0) & (new_index[g.edges[:, 1]] >= 0) if g.edge_count else np.zeros(0, bool)
    edges = new_index[g.edges[mask]] if g.edge_count else np.zeros((0, 2), np.int64)
    feats = None if g.node_features is None else g.node_features[keep]
    return Graph(len(keep), edges, g.edge_weights[mask], feats), keep


# ---------------------------------------------------------------- native text

def format_native(g: Graph) -> str:
    lines = [f"{g.node_count} {g.edge_count}"]
    for (u, v), w in zip(g.edges, g.edge_weights):
        lines.append(f"{u} {v}" if w == 1.0 else f"{u} {v} {float(w)!r}")
    return "\n".join(lines) + "\n"


def parse_native(text: str) -> list[Graph]:
    """Parse one or more concatenated native-format graphs.

    Each block is a ``n m`` header followed by ``m`` lines ``u v [w]``.
    Blank lines and ``#`` comments are ignored.
    """
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    graphs = []
    i = 0
    while i < len(rows):
        try:
            n, m = (int(t) for t in rows[i])
        except ValueError as exc:
            raise ParseError(f"bad header {' '.join(rows[i])!r}") from exc
        block = rows[i + 1 : i + 1 + m]
        if len(block) != m:
            raise FormatError(f"expected {m} edge lines, found {len(block)}")
        edges, weights = [], []
        for tok in block:
            if len(tok) not in (2, 3):
                raise FormatError(f"bad edge line {' '.join(tok)!r}")
            try:
                edges.append((int(tok[0]), int(tok[1])))
                weights.append(float(tok[2]) if len(tok) == 3 else 1.0)
            except ValueError as exc:
                raise ParseError(f"bad edge line {' '.join(tok)!r}") from exc
        graphs.append(Graph.from_edges(n, edges, weights))
        i += 1 + m
    return graphs


def read_native(path) -> list[Graph]:
    return parse_native(Path(path).read_text())


def write_native(graphs: Iterable[Graph], path) -> None:
    Path(path).write_text("".join(format_native(g) for g in graphs))


# ------------------------------------------------------------------ TU format

def _read_ints(path: Path, per_line: int) -> np.ndarray:
    if not path.exists():
        raise FormatError(f"missing file {path}")
    out = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        toks = [t.strip() for t in line.split(",")]
        if len(toks) != per_line:
            raise FormatError(f"{path.name}:{lineno}: expected {per_line} values")
        try:
            out.append([int(t) for t in toks])
        except ValueError as exc:
            raise ParseError(f"{path.name}:{lineno}: non-integer token in {line!r}") from exc
    return np.asarray(out, dtype=np.int64).reshape(-1, per_line)


def load_tu_dataset(directory, name: str) -> GraphDataset:
    """Load a dataset in the TU text format.

    Edges listed once or twice (both directions) are both accepted. Node
    labels, when present, become one-hot node features; otherwise every node
    gets the constant feature 1.0. Graph labels are remapped to ``0..C-1``
    and the mapping is kept in ``label_mapping``.
    """
    d = Path(directory)
    edges = _read_ints(d / f"{name}_A.txt", 2) - 1
    indicator = _read_ints(d / f"{name}_graph_indicator.txt", 1)[:, 0]
    raw_labels = _read_ints(d / f"{name}_graph_labels.txt", 1)[:, 0]
    node_label_path = d / f"{name}_node_labels.txt"
    node_labels = _read_ints(node_label_path, 1)[:, 0] if node_label_path.exists() else None

    n_total = len(indicator)
    graph_ids = np.unique(indicator)
    if len(graph_ids) != len(raw_labels) or (len(graph_ids) and graph_ids[0] < 1):
        raise FormatError("graph indicator does not match graph label count")
    if node_labels is not None and len(node_labels) != n_total:
        raise FormatError("node label count differs from indicator length")
    if len(edges) and (edges.min() < 0 or edges.max() >= n_total):
        raise FormatError("edge endpoint outside the indicator range")

    if node_labels is not None:
        values = np.unique(node_labels)
        onehot = np.zeros((n_total, len(values)))
        onehot[np.arange(n_total), np.searchsorted(values, node_labels)] = 1.0
    else:
        onehot = np.ones((n_total, 1))

    gid_of = np.searchsorted(graph_ids, indicator)
    local = np.zeros(n_total, dtype=np.int64)
    counts = np.zeros(len(graph_ids), dtype=np.int64)
    for node, gi in enumerate(gid_of):
        local[node] = counts[gi]
        counts[gi] += 1

    per_graph: list[list[tuple[int, int]]] = [[] for _ in graph_ids]
    seen: list[set] = [set() for _ in graph_ids]
    for u, v in edges:
        gu, gv = gid_of[u], gid_of[v]
        if gu != gv:
            raise FormatError(f"edge ({u + 1},{v + 1}) crosses graphs {graph_ids[gu]} and {graph_ids[gv]}")
        if u == v:
            raise FormatError(f"self-loop at node {u + 1}")
        a, b = sorted((int(local[u]), int(local[v])))
        if (a, b) not in seen[gu]:
            seen[gu].add((a, b))
            per_graph[gu].append((a, b))

    graphs = []
    for gi in range(len(graph_ids)):
        feats = onehot[gid_of == gi]
        graphs.append(Graph.from_edges(int(counts[gi]), per_graph[gi], node_features=feats))

    label_values = np.unique(raw_labels)
    mapping = {int(v): i for i, v in enumerate(label_values)}
    labels = np.searchsorted(label_values, raw_labels)
    return GraphDataset(name, graphs, labels, max(len(label_values), 1), mapping)


def write_tu_dataset(ds: GraphDataset, directory, name: str | None = None) -> None:
    """Write ``ds`` in the TU format (each edge listed in both directions).

    Node features that are one-hot rows are written back as node labels.
    """
    name = name or ds.name
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    inverse = {v: k for k, v in ds.label_mapping.items()}
    a_lines, ind_lines, node_label_lines = [], [], []
    offset = 0
    write_node_labels = all(
        g.node_features is not None
        and g.node_features.shape[1] > 1
        and np.all((g.node_features == 0) | (g.node_features == 1))
        and np.all(g.node_features.sum(axis=1) == 1)
        for g in ds.graphs
    ) and len(ds.graphs) > 0
    for gi, g in enumerate(ds.graphs):
        for u, v in g.edges:
            a_lines.append(f"{u + offset + 1}, {v + offset + 1}")
            a_lines.append(f"{v + offset + 1}, {u + offset + 1}")
        ind_lines.extend([str(gi + 1)] * g.node_count)
        if write_node_labels:
            node_label_lines.extend(str(int(i)) for i in np.argmax(g.node_features, axis=1))
        offset += g.node_count
    labels = [str(inverse.get(int(y), int(y))) for y in ds.labels]

    def dump(suffix, lines):
        (d / f"{name}_{suffix}.txt").write_text("".join(f"{x}\n" for x in lines))

    dump("A", a_lines)
    dump("graph_indicator", ind_lines)
    dump("graph_labels", labels)
    if write_node_labels:
        dump("node_labels", node_label_lines)


def degree_one_hot(ds: GraphDataset, max_degree: int | None = None) -> GraphDataset:
    """Replace node features by one-hot degree (clipped at ``max_degree``)."""
    if max_degree is None:
        max_degree = max((int(g.degrees().max()) for g in ds.graphs if g.node_count), default=0)
    graphs = []
    for g in ds.graphs:
        feats = np.zeros((g.node_count, max_degree + 1))
        feats[np.arange(g.node_count), np.minimum(g.degrees(), max_degree)] = 1.0
        graphs.append(g.with_features(feats))
    return GraphDataset(ds.name, graphs, ds.labels, ds.class_count, ds.label_mapping)


def node_feature_matrix(g: Graph) -> np.ndarray:
    """Node features with the constant-1 fallback for unattributed graphs."""
    if g.node_features is None:
        return np.ones((g.node_count, 1))
    return np.asarray(g.node_features)


def check_graphs(X) -> list[Graph]:
    """Validate estimator input: a non-empty sequence of valid graphs."""
    if isinstance(X, GraphDataset):
        X = X.graphs
    graphs = list(X)
    if not graphs:
        raise ArgumentError("expected at least one graph")
    for i, g in enumerate(graphs):
        if not isinstance(g, Graph):
            raise ArgumentError(f"item {i} is {type(g).__name__}, not Graph")
        problems = validate_graph(g)
        if problems:
            raise ArgumentError(f"graph {i} is invalid: {problems[0]}")
    return graphs


def dataset_dir_from_env(name: str) -> Path | None:
    """Locate an optional real dataset under ``$COHESION_GCL_DATA/<name>``."""
    root = os.environ.get("COHESION_GCL_DATA", "data")
    p = Path(root) / name
    return p if (p / f"{name}_A.txt").exists() else None
