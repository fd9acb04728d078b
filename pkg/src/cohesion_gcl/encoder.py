"""GIN / O-GSN graph encoder with hand-written backpropagation.

A batch of graphs is packed into one block-diagonal sparse adjacency. Each
layer concatenates the fixed substructure rows ``S`` (when O-GSN is on) to
the current node states, aggregates ``(1 + eps) h_v + sum_{u in N(v)} h_u``
and applies a two-layer ReLU MLP. The graph embedding is the sum of the
final node states; a two-layer projection head feeds the contrastive loss.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .augment import refined_drop_plan, sample_node_drop, uniform_plan, vertex_importance_prob
from .errors import ArgumentError, DivergedError, FormatError
from .graph import Graph, node_feature_matrix


@dataclass
class EncoderConfig:
    layer_count: int = 3
    hidden_dim: int = 32
    use_ogsn: bool = True
    tau: float = 0.2
    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    epsilon_gin: float = 0.0
    learn_epsilon: bool = False

    def __post_init__(self):
        for name in ("layer_count", "hidden_dim", "epochs", "batch_size"):
            if int(getattr(self, name)) < 1:
                raise ArgumentError(f"{name} must be positive")
        if self.tau <= 0 or self.learning_rate <= 0:
            raise ArgumentError("tau and learning_rate must be positive")
        if self.optimizer not in ("sgd", "adam"):
            raise ArgumentError("optimizer must be sgd or adam")


@dataclass
class EncoderState:
    params: dict
    trainable: tuple
    moments: dict = field(default_factory=dict)
    step: int = 0
    loss_history: list = field(default_factory=list)

    def copy(self) -> "EncoderState":
        return EncoderState(
            {k: v.copy() for k, v in self.params.items()},
            self.trainable,
            {k: v.copy() for k, v in self.moments.items()},
            self.step,
            list(self.loss_history),
        )


def _layer_input_dims(cfg: EncoderConfig, feature_dim: int, substructure_dim: int) -> list[int]:
    extra = substructure_dim if cfg.use_ogsn else 0
    return [(feature_dim if i == 0 else cfg.hidden_dim) + extra for i in range(cfg.layer_count)]


def init_state(cfg: EncoderConfig, feature_dim: int, substructure_dim: int = 0) -> EncoderState:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights from ``cfg.seed``."""
    if feature_dim < 1 or (cfg.use_ogsn and substructure_dim < 1):
        raise ArgumentError("feature and substructure dims must be >= 1")
    rng = np.random.default_rng([cfg.seed, 0x6E63])
    h = cfg.hidden_dim
    params = {}

    def linear(name, fan_in, fan_out):
        bound = 1.0 / np.sqrt(fan_in)
        params[f"{name}.W"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"{name}.b"] = rng.uniform(-bound, bound, size=fan_out)

    for i, d_in in enumerate(_layer_input_dims(cfg, feature_dim, substructure_dim)):
        linear(f"gin{i}.mlp0", d_in, h)
        linear(f"gin{i}.mlp1", h, h)
        params[f"gin{i}.eps"] = np.array(float(cfg.epsilon_gin))
    linear("proj0", h, h)
    linear("proj1", h, h)
    trainable = tuple(k for k in params if cfg.learn_epsilon or not k.endswith(".eps"))
    return EncoderState(params, trainable)


# ------------------------------------------------------------------- batching

@dataclass
class PackedBatch:
    x: np.ndarray
    s: np.ndarray | None
    adj: sp.csr_matrix
    pool: sp.csr_matrix


def pack(graphs, substructures=None, use_ogsn: bool = True) -> PackedBatch:
    """Stack graphs into one block-diagonal problem."""
    graphs = list(graphs)
    xs, rows, cols, vals, owner = [], [], [], [], []
    offset = 0
    for gi, g in enumerate(graphs):
        xs.append(node_feature_matrix(g))
        e = g.edges + offset
        rows += [e[:, 0], e[:, 1]]
        cols += [e[:, 1], e[:, 0]]
        vals += [g.edge_weights, g.edge_weights]
        owner.append(np.full(g.node_count, gi))
        offset += g.node_count
    n = offset
    cat = lambda parts, dtype: np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype)
    adj = sp.csr_matrix((cat(vals, float), (cat(rows, np.int64), cat(cols, np.int64))), shape=(n, n))
    owner = cat(owner, np.int64)
    pool = sp.csr_matrix((np.ones(n), (owner, np.arange(n))), shape=(len(graphs), n))
    x = np.vstack(xs) if xs else np.zeros((0, 1))
    s = None
    if use_ogsn:
        if substructures is None:
            raise ArgumentError("O-GSN needs substructure features")
        substructures = list(substructures)
        for g, rows_ in zip(graphs, substructures):
            if rows_.shape[0] != g.node_count:
                raise ArgumentError("substructure rows do not match node count")
        s = np.vstack(substructures).astype(np.float64)
    return PackedBatch(x, s, adj, pool)


# -------------------------------------------------------------- forward/back

def _forward(batch: PackedBatch, st: EncoderState, cfg: EncoderConfig):
    p = st.params
    h = batch.x
    cache = []
    for i in range(cfg.layer_count):
        hc = np.hstack([h, batch.s]) if cfg.use_ogsn else h
        eps = float(p[f"gin{i}.eps"])
        agg = (1.0 + eps) * hc + batch.adj @ hc
        z1 = agg @ p[f"gin{i}.mlp0.W"] + p[f"gin{i}.mlp0.b"]
        r1 = np.maximum(z1, 0.0)
        z2 = r1 @ p[f"gin{i}.mlp1.W"] + p[f"gin{i}.mlp1.b"]
        cache.append((h.shape[1], hc, agg, z1, r1, z2))
        h = np.maximum(z2, 0.0)
    g = np.asarray(batch.pool @ h)
    q1 = g @ p["proj0.W"] + p["proj0.b"]
    r = np.maximum(q1, 0.0)
    z = r @ p["proj1.W"] + p["proj1.b"]
    return g, z, (cache, g, q1, r)


def _backward(batch: PackedBatch, st: EncoderState, cfg: EncoderConfig, saved, dz: np.ndarray) -> dict:
    p = st.params
    cache, g, q1, r = saved
    grads = {}
    grads["proj1.W"] = r.T @ dz
    grads["proj1.b"] = dz.sum(axis=0)
    dq1 = (dz @ p["proj1.W"].T) * (q1 > 0)
    grads["proj0.W"] = g.T @ dq1
    grads["proj0.b"] = dq1.sum(axis=0)
    dh = np.asarray(batch.pool.T @ (dq1 @ p["proj0.W"].T))
    for i in reversed(range(cfg.layer_count)):
        width, hc, agg, z1, r1, z2 = cache[i]
        dz2 = dh * (z2 > 0)
        grads[f"gin{i}.mlp1.W"] = r1.T @ dz2
        grads[f"gin{i}.mlp1.b"] = dz2.sum(axis=0)
        dz1 = (dz2 @ p[f"gin{i}.mlp1.W"].T) * (z1 > 0)
        grads[f"gin{i}.mlp0.W"] = agg.T @ dz1
        grads[f"gin{i}.mlp0.b"] = dz1.sum(axis=0)
        dagg = dz1 @ p[f"gin{i}.mlp0.W"].T
        grads[f"gin{i}.eps"] = np.array(float(np.sum(dagg * hc)))
        dhc = (1.0 + float(p[f"gin{i}.eps"])) * dagg + batch.adj.T @ dagg
        dh = dhc[:, :width]
    return grads


def encode_batch(graphs, substructures, st: EncoderState, cfg: EncoderConfig) -> np.ndarray:
    """Pre-projection embeddings, one row per graph."""
    batch = pack(graphs, substructures, cfg.use_ogsn)
    g, _, _ = _forward(batch, st, cfg)
    return g


def encode(g: Graph, s, st: EncoderState, cfg: EncoderConfig) -> np.ndarray:
    return encode_batch([g], None if s is None else [np.asarray(s)], st, cfg)[0]


# ---------------------------------------------------------------------- loss

def ntxent_loss(anchors, positives, tau: float):
    """In-batch NT-Xent over cosine similarities.

    Row ``i`` contrasts anchor ``i`` against every positive ``j``; the
    matching positive sits in the numerator. Returns the mean loss and its
    gradients with respect to ``anchors`` and ``positives``.
    """
    a = np.asarray(anchors, dtype=np.float64)
    b = np.asarray(positives, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] < 2:
        raise ArgumentError("need two equally shaped batches of at least 2 embeddings")
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ArgumentError("zero-norm embedding")
    ua, ub = a / na[:, None], b / nb[:, None]
    logits = ua @ ub.T / tau
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_den = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    n = a.shape[0]
    loss = float(np.mean(log_den - np.diag(logits)))
    soft = np.exp(logits - log_den[:, None])
    dlogits = (soft - np.eye(n)) / n
    dua = dlogits @ ub / tau
    dub = dlogits.T @ ua / tau
    da = (dua - ua * np.sum(dua * ua, axis=1, keepdims=True)) / na[:, None]
    db = (dub - ub * np.sum(dub * ub, axis=1, keepdims=True)) / nb[:, None]
    return loss, da, db


def contrastive_loss_and_grads(views_a, views_b, st: EncoderState, cfg: EncoderConfig):
    """Loss and parameter gradients for one batch of view pairs.

    ``views_a`` and ``views_b`` are equal-length lists of ``(graph, s_rows)``.
    """
    graphs = [v[0] for v in views_a] + [v[0] for v in views_b]
    subs = [v[1] for v in views_a] + [v[1] for v in views_b] if cfg.use_ogsn else None
    batch = pack(graphs, subs, cfg.use_ogsn)
    _, z, saved = _forward(batch, st, cfg)
    n = len(views_a)
    loss, da, db = ntxent_loss(z[:n], z[n:], cfg.tau)
    return loss, _backward(batch, st, cfg, saved, np.vstack([da, db]))


# ---------------------------------------------------------------- optimizers

def optimizer_step(st: EncoderState, grads: dict, cfg: EncoderConfig) -> None:
    st.step += 1
    lr = cfg.learning_rate
    for k in st.trainable:
        grad = grads[k]
        if cfg.optimizer == "sgd":
            st.params[k] = st.params[k] - lr * grad
            continue
        m = st.moments.get(f"m.{k}", np.zeros_like(grad))
        v = st.moments.get(f"v.{k}", np.zeros_like(grad))
        m = 0.9 * m + 0.1 * grad
        v = 0.999 * v + 0.001 * grad * grad
        st.moments[f"m.{k}"], st.moments[f"v.{k}"] = m, v
        m_hat = m / (1 - 0.9 ** st.step)
        v_hat = v / (1 - 0.999 ** st.step)
        st.params[k] = st.params[k] - lr * m_hat / (np.sqrt(v_hat) + 1e-8)
    for k in st.trainable:
        if not np.all(np.isfinite(st.params[k])):
            raise DivergedError(st.step)


# ------------------------------------------------------------------ training

def make_plans(graphs, prop: str, p_dr: float, eps: float, f_kind: str):
    plans = []
    for g in graphs:
        if eps == 0:
            plans.append(uniform_plan(g, p_dr))
        else:
            plans.append(refined_drop_plan(g, vertex_importance_prob(g, prop), p_dr, eps, f_kind))
    return plans


def _view(g, s, plan, seed, gi, draw):
    sub, mapping = sample_node_drop(g, plan, seed, gi, draw, return_mapping=True)
    return sub, (None if s is None else s[mapping])


def train(graphs, substructures, cfg: EncoderConfig, prop: str = "core", eps: float = 0.2,
          f_kind: str = "square", p_dr: float = 0.2, plans=None, jobs: int = 1,
          state: EncoderState | None = None) -> EncoderState:
    """Contrastive training with two cohesion-refined node-drop views per graph.

    Views for graph ``i`` in epoch ``e`` use draws ``2e`` and ``2e + 1`` of
    that graph's random stream, so the trajectory depends only on the data,
    ``cfg`` and the seed. ``jobs`` only parallelises view generation.
    """
    graphs = list(graphs)
    if len(graphs) < 2:
        raise ArgumentError("training needs at least two graphs")
    subs = list(substructures) if cfg.use_ogsn else [None] * len(graphs)
    if plans is None:
        plans = make_plans(graphs, prop, p_dr, eps, f_kind)
    if state is None:
        feature_dim = node_feature_matrix(graphs[0]).shape[1]
        state = init_state(cfg, feature_dim, subs[0].shape[1] if cfg.use_ogsn else 0)
    view_seed = int(np.random.SeedSequence([cfg.seed, 0x7677]).generate_state(1)[0])
    pool = None
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        pool = ThreadPoolExecutor(jobs)
    try:
        for epoch in range(cfg.epochs):
            order = np.random.default_rng([cfg.seed, 0x6570, epoch]).permutation(len(graphs))
            for start in range(0, len(order), cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                if len(idx) < 2:
                    continue
                jobs_a = [(graphs[i], subs[i], plans[i], view_seed, int(i), 2 * epoch) for i in idx]
                jobs_b = [(graphs[i], subs[i], plans[i], view_seed, int(i), 2 * epoch + 1) for i in idx]
                if pool is not None:
                    views_a = list(pool.map(lambda a: _view(*a), jobs_a))
                    views_b = list(pool.map(lambda a: _view(*a), jobs_b))
                else:
                    views_a = [_view(*a) for a in jobs_a]
                    views_b = [_view(*a) for a in jobs_b]
                loss, grads = contrastive_loss_and_grads(views_a, views_b, state, cfg)
                if not np.isfinite(loss):
                    raise DivergedError(state.step + 1, f"non-finite loss at step {state.step + 1}")
                optimizer_step(state, grads, cfg)
                state.loss_history.append(loss)
    finally:
        if pool is not None:
            pool.shutdown()
    return state


def gradcheck(st: EncoderState, views_a, views_b, cfg: EncoderConfig, step: float = 1e-5,
              analytic: dict | None = None) -> float:
    """Largest per-tensor relative error between analytic and central-difference gradients.

    For each trainable tensor the error is ``||g_a - g_fd|| / max(||g_a||, ||g_fd||)``
    (0 when both vanish). ``analytic`` overrides the backprop gradients.
    """
    if analytic is None:
        _, analytic = contrastive_loss_and_grads(views_a, views_b, st, cfg)
    probe = st.copy()
    worst = 0.0
    for k in st.trainable:
        base = probe.params[k]
        fd = np.zeros_like(base)
        flat = base.reshape(-1)
        fd_flat = fd.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up, _ = contrastive_loss_and_grads(views_a, views_b, probe, cfg)
            flat[j] = orig - step
            down, _ = contrastive_loss_and_grads(views_a, views_b, probe, cfg)
            flat[j] = orig
            fd_flat[j] = (up - down) / (2 * step)
        num = np.linalg.norm(analytic[k] - fd)
        den = max(np.linalg.norm(analytic[k]), np.linalg.norm(fd))
        if den > 1e-12:
            worst = max(worst, num / den)
    return float(worst)


def min_abs_preactivation(views_a, views_b, st: EncoderState, cfg: EncoderConfig) -> float:
    """Distance of the closest ReLU input to its kink.

    Central differences are only meaningful when this exceeds the step.
    """
    graphs = [v[0] for v in views_a] + [v[0] for v in views_b]
    subs = [v[1] for v in views_a] + [v[1] for v in views_b] if cfg.use_ogsn else None
    _, _, (cache, _, q1, _) = _forward(pack(graphs, subs, cfg.use_ogsn), st, cfg)
    parts = [np.abs(q1).ravel()] + [np.abs(c[3]).ravel() for c in cache] + [np.abs(c[5]).ravel() for c in cache]
    return float(np.concatenate(parts).min())


def fuse_embeddings(per_property) -> np.ndarray:
    """Concatenate per-property embeddings along the last axis, in the given order."""
    parts = [np.asarray(e, dtype=np.float64) for e in per_property]
    if not parts:
        raise ArgumentError("need at least one embedding to fuse")
    for e in parts:
        if not np.all(np.isfinite(e)):
            raise ArgumentError("non-finite embedding")
    return np.concatenate(parts, axis=-1)


# ------------------------------------------------------------------ state I/O
#
# Layout (little endian):
#   b"CGCLSTAT"  magic
#   u32 version (=1), u32 tensor count, u64 optimizer step
#   per tensor: u16 name length, utf-8 name, u8 trainable flag, u8 ndim,
#               ndim x u64 dims, then prod(dims) float64 values, row-major.
# Optimizer moments follow as tensors named "m.<param>" / "v.<param>".

_MAGIC = b"CGCLSTAT"
_VERSION = 1


def save_state(st: EncoderState, path) -> None:
    tensors = [(k, v, k in st.trainable) for k, v in st.params.items()]
    tensors += [(k, v, False) for k, v in sorted(st.moments.items())]
    out = [_MAGIC, struct.pack("<IIQ", _VERSION, len(tensors), st.step)]
    for name, arr, flag in tensors:
        raw = name.encode()
        arr = np.asarray(arr, dtype="<f8")
        out.append(struct.pack("<H", len(raw)) + raw + struct.pack("<BB", flag, arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(arr.tobytes(order="C"))
    Path(path).write_bytes(b"".join(out))


def load_state(path) -> EncoderState:
    data = Path(path).read_bytes()
    if data[:8] != _MAGIC:
        raise FormatError(f"{path} is not an encoder state file")
    version, count, step = struct.unpack_from("<IIQ", data, 8)
    if version != _VERSION:
        raise FormatError(f"unsupported state version {version}")
    pos = 24
    params, moments, trainable = {}, {}, []
    for _ in range(count):
        (length,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos : pos + length].decode()
        pos += length
        flag, ndim = struct.unpack_from("<BB", data, pos)
        pos += 2
        shape = struct.unpack_from(f"<{ndim}Q", data, pos)
        pos += 8 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape).astype(np.float64)
        pos += 8 * size
        if name.startswith(("m.", "v.")):
            moments[name] = arr
        else:
            params[name] = arr
            if flag:
                trainable.append(name)
    return EncoderState(params, tuple(trainable), moments, step)


def config_dict(cfg: EncoderConfig) -> dict:
    return asdict(cfg)
