"""Command-line entry point ``cohesion-gcl``.

Exit codes: 0 success, 1 unexpected failure, 2 bad arguments/config,
3 malformed input files, 4 I/O failure, 5 empty or degenerate input,
6 training diverged.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .augment import (
    ppr_diffusion,
    preservation_ratio,
    refined_drop_plan,
    reweight_edges,
    sample_edge_drop,
    sample_node_drop,
    uniform_plan,
    vertex_importance_det,
    vertex_importance_prob,
)
from .cohesion import core_numbers, truss_numbers
from .encoder import EncoderConfig, save_state, train
from .errors import ArgumentError, CohesionGCLError, IoError
from .evaluation import repeated_probe
from .graph import format_native, load_tu_dataset, read_native, write_tu_dataset
from .pipeline import load_config, metrics_csv, run_pipeline, summary_line
from .substructure import SubstructureSpec, cache_path, ogsn_features
from .synthetic import KINDS, generate_synthetic


def _graphs(args):
    if getattr(args, "graph", None):
        return read_native(args.graph)
    if getattr(args, "dataset", None):
        return list(_dataset(args).graphs)
    raise ArgumentError("give --graph FILE or --dataset DIR")


def _dataset(args):
    if getattr(args, "synthetic", None):
        return generate_synthetic(args.synthetic, args.n_graphs, args.seed)
    if not getattr(args, "dataset", None):
        raise ArgumentError("give --dataset DIR or --synthetic KIND")
    directory = Path(args.dataset)
    if not directory.is_dir():
        raise IoError(f"dataset directory {directory} does not exist")
    return load_tu_dataset(directory, args.name or directory.name)


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows) -> str:
    import io

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_decompose(args):
    graphs = _graphs(args)
    multi = len(graphs) > 1
    rows = []
    if args.property == "core":
        rows.append((["graph"] if multi else []) + ["node", "core_number"])
        for gi, g in enumerate(graphs):
            for v, c in enumerate(core_numbers(g).core_number):
                rows.append(([gi] if multi else []) + [v, int(c)])
    else:
        rows.append((["graph"] if multi else []) + ["u", "v", "truss_number"])
        for gi, g in enumerate(graphs):
            if g.edge_count == 0:
                continue
            dec = truss_numbers(g)
            for u, v in g.edge_list():
                rows.append(([gi] if multi else []) + [u, v, dec.truss_number[(u, v)]])
    _emit(args, _csv(rows))


def cmd_features(args):
    ds = _dataset(args)
    spec = SubstructureSpec(tuple(int(k) for k in args.sizes.split(",")), args.normalization)
    ogsn_features(ds, spec, cache=True, directory=args.cache_dir, jobs=args.jobs)
    print(cache_path(ds.name, spec, args.cache_dir))


def _plan(g, args):
    if args.eps == 0:
        return uniform_plan(g, args.p_dr)
    return refined_drop_plan(g, vertex_importance_prob(g, args.property), args.p_dr, args.eps, args.f)


def cmd_augment(args):
    chunks = []
    for gi, g in enumerate(_graphs(args)):
        plan = _plan(g, args)
        for draw in range(args.samples):
            if args.mode == "node":
                view = sample_node_drop(g, plan, args.seed, gi, draw)
            else:
                view = sample_edge_drop(g, plan, args.seed, gi, draw)
            chunks.append(format_native(view))
    _emit(args, "".join(chunks))


def cmd_diffuse(args):
    graphs = _graphs(args)
    if len(graphs) != 1:
        raise ArgumentError("diffuse takes exactly one graph")
    g = graphs[0]
    if args.eta > 0:
        g = reweight_edges(g, vertex_importance_det(g, args.property), args.eta)
    s = ppr_diffusion(g, args.alpha).matrix
    _emit(args, _csv([[repr(float(x)) for x in row] for row in s]))


def cmd_stats(args):
    rows = [["graph", "property", "random", "refined"]]
    for gi, g in enumerate(_graphs(args)):
        for prop in args.property.split(","):
            refined = refined_drop_plan(g, vertex_importance_prob(g, prop), args.p_dr, args.eps, args.f)
            try:
                r = preservation_ratio(g, uniform_plan(g, args.p_dr), prop, args.samples, args.seed, gi)
                c = preservation_ratio(g, refined, prop, args.samples, args.seed, gi)
            except CohesionGCLError:
                continue
            rows.append([gi, prop, f"{r:.6f}", f"{c:.6f}"])
    _emit(args, _csv(rows))


def cmd_train(args):
    ds = _dataset(args)
    cfg = EncoderConfig(use_ogsn=args.ogsn == "on", epochs=args.epochs, seed=args.seed,
                        hidden_dim=args.hidden_dim, batch_size=args.batch_size)
    subs = ogsn_features(ds, SubstructureSpec(), cache=False) if cfg.use_ogsn else None
    props = args.property.split(",")
    out = Path(args.out)
    for prop in props:
        state = train(ds.graphs, subs, cfg, prop, args.eps, args.f, args.p_dr, jobs=args.jobs)
        path = out if len(props) == 1 else out.with_name(f"{out.stem}.{prop}{out.suffix or '.bin'}")
        save_state(state, path)
        print(f"{prop}: final loss {state.loss_history[-1]:.6f} -> {path}")


def _read_matrix(path) -> np.ndarray:
    rows = [r for r in csv.reader(Path(path).read_text().splitlines()) if r]
    try:
        return np.array([[float(x) for x in r] for r in rows])
    except ValueError:
        return np.array([[float(x) for x in r] for r in rows[1:]])


def cmd_evaluate(args):
    X = _read_matrix(args.embeddings)
    y = _read_matrix(args.labels)[:, -1].astype(np.int64)
    report = repeated_probe(X, y, args.folds, args.repeats, args.l2, args.seed)
    _emit(args, metrics_csv(report.rows))
    print(f"mean accuracy {report.mean:.4f} +/- {report.std:.4f}", file=sys.stderr)


def cmd_run(args):
    cfg = load_config(args.config)
    if args.out:
        cfg = replace(cfg, out=args.out)
    if args.jobs:
        cfg = replace(cfg, jobs=args.jobs)
    print(summary_line(run_pipeline(cfg)))


def cmd_synth(args):
    ds = generate_synthetic(args.kind, args.n_graphs, args.seed)
    write_tu_dataset(ds, args.out, args.name or Path(args.out).name)
    print(f"wrote {len(ds)} graphs to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cohesion-gcl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp, graph=True):
        if graph:
            sp.add_argument("--graph", help="native-format graph file")
        sp.add_argument("--dataset", help="TU dataset directory")
        sp.add_argument("--name", help="TU dataset name (default: directory name)")

    def drop_flags(sp):
        sp.add_argument("--property", default="core")
        sp.add_argument("--p-dr", type=float, default=0.2)
        sp.add_argument("--eps", type=float, default=0.2)
        sp.add_argument("--f", choices=["linear", "sqrt", "square"], default="square")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("decompose", help="core numbers or truss numbers as CSV")
    source(sp)
    sp.add_argument("--property", choices=["core", "truss"], default="core")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("features", help="precompute clique-count features into the cache")
    source(sp, graph=False)
    sp.add_argument("--synthetic", choices=KINDS)
    sp.add_argument("--n-graphs", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sizes", default="3,4,5")
    sp.add_argument("--normalization", default="log1p")
    sp.add_argument("--cache-dir")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("augment", help="sample augmented views in native format")
    source(sp)
    drop_flags(sp)
    sp.add_argument("--mode", choices=["node", "edge"], default="node")
    sp.add_argument("--samples", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("diffuse", help="(cohesion-reweighted) PPR diffusion matrix as CSV")
    source(sp)
    sp.add_argument("--alpha", type=float, default=0.2)
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--property", choices=["core", "truss"], default="core")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_diffuse)

    sp = sub.add_parser("stats", help="augmentation statistics")
    stats = sp.add_subparsers(dest="stat", required=True)
    sp = stats.add_parser("preservation", help="main-cohesive node preservation, random vs refined")
    source(sp)
    drop_flags(sp)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("train", help="train one encoder per cohesion property")
    source(sp, graph=False)
    sp.add_argument("--synthetic", choices=KINDS)
    sp.add_argument("--n-graphs", type=int, default=100)
    drop_flags(sp)
    sp.add_argument("--ogsn", choices=["on", "off"], default="on")
    sp.add_argument("--epochs", type=int, default=20)
    sp.add_argument("--hidden-dim", type=int, default=32)
    sp.add_argument("--batch-size", type=int, default=16)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True, help="state file (suffixed per property when several)")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="k-fold linear probe on stored embeddings")
    sp.add_argument("--embeddings", required=True, help="CSV, one row per graph")
    sp.add_argument("--labels", required=True, help="CSV whose last column is the label")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--l2", type=float, default=1e-4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("run", help="full pipeline from a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("synth", help="write a synthetic dataset in TU format")
    sp.add_argument("--kind", choices=KINDS, default="planted-clique")
    sp.add_argument("--n-graphs", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--name")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CohesionGCLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IoError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
