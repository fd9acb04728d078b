"""Per-node clique counts computed once on the original graphs."""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, IoError
from .graph import Graph, GraphDataset

NORMALIZATIONS = ("none", "log1p", "max-per-graph")


@dataclass(frozen=True)
class SubstructureSpec:
    clique_sizes: tuple = (3, 4, 5)
    normalization: str = "log1p"

    def __post_init__(self):
        sizes = tuple(sorted({int(k) for k in self.clique_sizes}))
        if not sizes or sizes[0] < 3:
            raise ArgumentError("clique sizes must be a non-empty set of integers >= 3")
        if self.normalization not in NORMALIZATIONS:
            raise ArgumentError(f"normalization must be one of {NORMALIZATIONS}")
        object.__setattr__(self, "clique_sizes", sizes)

    @property
    def tag(self) -> str:
        return "c" + "-".join(map(str, self.clique_sizes)) + "." + self.normalization


def count_cliques_per_node(g: Graph, sizes=(3, 4, 5)) -> np.ndarray:
    """Matrix of shape (node_count, len(sizes)): k-cliques containing each node.

    Cliques are enumerated once each by extending them only with
    higher-indexed common neighbours.
    """
    sizes = tuple(sorted({int(k) for k in sizes}))
    if not sizes or sizes[0] < 3:
        raise ArgumentError("clique sizes must be >= 3")
    col = {k: i for i, k in enumerate(sizes)}
    top = sizes[-1]
    counts = np.zeros((g.node_count, len(sizes)), dtype=np.int64)
    higher = [set(v for v in nb if v > u) for u, nb in enumerate(g.neighbors())]

    def extend(clique, cands):
        size = len(clique)
        if size in col:
            counts[clique, col[size]] += 1
        if size == top:
            return
        for v in sorted(cands):
            extend(clique + [v], cands & higher[v])

    for u in range(g.node_count):
        for v in sorted(higher[u]):
            extend([u, v], higher[u] & higher[v])
    return counts


def normalize_counts(counts: np.ndarray, normalization: str) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    if normalization == "none":
        return counts
    if normalization == "log1p":
        return np.log1p(counts)
    if normalization == "max-per-graph":
        peak = counts.max(axis=0, initial=0.0)
        return np.divide(counts, peak, out=np.zeros_like(counts), where=peak > 0)
    raise ArgumentError(f"unknown normalization {normalization!r}")


def cache_dir() -> Path:
    return Path(os.environ.get("COHESION_GCL_CACHE", Path.home() / ".cache" / "cohesion_gcl"))


def cache_path(ds_name: str, spec: SubstructureSpec, directory=None) -> Path:
    return Path(directory or cache_dir()) / f"{ds_name}.{spec.tag}.csv"


def write_features_csv(features, spec: SubstructureSpec, path) -> None:
    """Atomically write ``graph,node,c3,...`` rows."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["graph", "node"] + [f"c{k}" for k in spec.clique_sizes])
            for gi, mat in enumerate(features):
                for v, row in enumerate(mat):
                    w.writerow([gi, v] + [repr(float(x)) for x in row])
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write feature cache {path}: {exc}") from exc


def read_features_csv(path, node_counts) -> list[np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    width = len(rows[0]) - 2
    out = [np.zeros((n, width)) for n in node_counts]
    for row in rows[1:]:
        out[int(row[0])][int(row[1])] = [float(x) for x in row[2:]]
    return out


def ogsn_features(ds: GraphDataset, spec: SubstructureSpec = SubstructureSpec(), cache=True,
                  directory=None, jobs: int = 1) -> list[np.ndarray]:
    """Normalized clique-count features for every original graph of ``ds``.

    With ``cache`` on, results are read from / written to a CSV keyed by the
    dataset name and ``spec``.
    """
    path = cache_path(ds.name, spec, directory)
    node_counts = [g.node_count for g in ds.graphs]
    if cache and path.exists():
        feats = read_features_csv(path, node_counts)
        if all(f.shape == (n, len(spec.clique_sizes)) for f, n in zip(feats, node_counts)):
            return feats

    def one(g):
        return normalize_counts(count_cliques_per_node(g, spec.clique_sizes), spec.normalization)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(jobs) as pool:
            feats = list(pool.map(one, ds.graphs))
    else:
        feats = [one(g) for g in ds.graphs]
    if cache:
        write_features_csv(feats, spec, path)
    return feats
