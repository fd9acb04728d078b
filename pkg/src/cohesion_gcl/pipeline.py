"""End-to-end runs driven by a ``key = value`` config file.

Config grammar (``configparser``): sections ``[data]``, ``[augment]``,
``[substructure]``, ``[encoder]``, ``[eval]`` and ``[run]``; ``#`` or ``;``
start comments; lists are comma separated. Unknown keys are errors.
``[run] seed`` seeds everything, including the encoder. The run
manifest written next to the outputs uses the same grammar, so it can be
fed back to ``cohesion-gcl run --config``.
"""

from __future__ import annotations

import configparser
import csv
import io
import platform
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .cohesion import PROPERTIES
from .encoder import EncoderConfig, encode_batch, fuse_embeddings, make_plans, save_state, train
from .errors import ArgumentError, CohesionGCLError, IoError
from .evaluation import repeated_probe
from .graph import GraphDataset, degree_one_hot, load_tu_dataset
from .substructure import SubstructureSpec, ogsn_features
from .synthetic import KINDS, generate_synthetic

# grid-searched decay (GraphCL-style path) and reweighting factors per dataset
DATASET_DEFAULTS = {
    "IMDB-BINARY": {"eps": 0.2, "eta": 0.4},
    "IMDB-MULTI": {"eps": 0.4, "eta": 0.4},
    "COLLAB": {"eps": 0.2, "eta": 0.2},
    "REDDIT-BINARY": {"eps": 0.4},
    "REDDIT-THREADS": {"eps": 0.2},
    "ENZYMES": {"eps": 0.4, "eta": 0.6},
    "PROTEINS": {"eps": 0.8, "eta": 0.8},
}
_ALIASES = {"IMDB-B": "IMDB-BINARY", "IMDB-M": "IMDB-MULTI", "RDT-B": "REDDIT-BINARY", "RDT-T": "REDDIT-THREADS"}


@dataclass
class PipelineConfig:
    dataset_path: str = ""
    dataset_name: str = ""
    synthetic: str = "planted-clique"
    n_graphs: int = 100
    node_features: str = "constant"
    properties: tuple = ("core", "truss")
    eps: float | None = None
    f_kind: str = "square"
    p_dr: float = 0.2
    eta: float | None = None
    alpha: float = 0.2
    substructure: SubstructureSpec = field(default_factory=SubstructureSpec)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    folds: int = 10
    repeats: int = 1
    l2: float = 1e-4
    seed: int = 0
    out: str = "run"
    jobs: int = 1

    def __post_init__(self):
        self.properties = tuple(self.properties)
        if not self.properties or any(p not in PROPERTIES for p in self.properties):
            raise ArgumentError("properties must be a non-empty subset of {core, truss}")
        if self.node_features not in ("constant", "degree"):
            raise ArgumentError("node_features must be constant or degree")
        if not self.dataset_path and self.synthetic not in KINDS:
            raise ArgumentError(f"synthetic must be one of {KINDS} when no dataset path is set")

    @property
    def canonical_name(self) -> str:
        return _ALIASES.get(self.dataset_name, self.dataset_name)

    def resolved_eps(self) -> float:
        if self.eps is not None:
            return self.eps
        return DATASET_DEFAULTS.get(self.canonical_name, {}).get("eps", 0.2)

    def resolved_eta(self) -> float:
        if self.eta is not None:
            return self.eta
        return DATASET_DEFAULTS.get(self.canonical_name, {}).get("eta", 0.4)


_SECTIONS = {
    "data": {"path": "dataset_path", "name": "dataset_name", "synthetic": "synthetic",
             "n_graphs": "n_graphs", "node_features": "node_features"},
    "augment": {"properties": "properties", "eps": "eps", "f": "f_kind", "p_dr": "p_dr",
                "eta": "eta", "alpha": "alpha"},
    "eval": {"folds": "folds", "repeats": "repeats", "l2": "l2"},
    "run": {"seed": "seed", "out": "out", "jobs": "jobs"},
}


def _coerce(text: str, like):
    text = text.strip()
    if isinstance(like, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ArgumentError(f"not a boolean: {text!r}")
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float) or like is None:
        return float(text)
    if isinstance(like, tuple):
        return tuple(t.strip() for t in text.split(",") if t.strip())
    return text


def parse_config(text: str) -> PipelineConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ArgumentError(f"bad config: {exc}") from exc
    base = PipelineConfig()
    values, enc, sub = {}, {}, {}
    for section in cp.sections():
        items = cp[section]
        if section in _SECTIONS:
            for key, raw in items.items():
                if key not in _SECTIONS[section]:
                    raise ArgumentError(f"unknown key {section}.{key}")
                attr = _SECTIONS[section][key]
                values[attr] = _coerce(raw, getattr(base, attr))
        elif section == "encoder":
            defaults = EncoderConfig()
            for key, raw in items.items():
                if not hasattr(defaults, key):
                    raise ArgumentError(f"unknown key encoder.{key}")
                enc[key] = _coerce(raw, getattr(defaults, key))
        elif section == "substructure":
            for key, raw in items.items():
                if key == "clique_sizes":
                    sub[key] = tuple(int(t) for t in raw.split(",") if t.strip())
                elif key == "normalization":
                    sub[key] = raw.strip()
                else:
                    raise ArgumentError(f"unknown key substructure.{key}")
        elif section != "manifest":
            raise ArgumentError(f"unknown section [{section}]")
    try:
        values["encoder"] = EncoderConfig(**enc)
        values["substructure"] = SubstructureSpec(**sub)
        return PipelineConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(str(exc)) from exc


def load_config(path) -> PipelineConfig:
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc


def format_config(cfg: PipelineConfig, extra: dict | None = None) -> str:
    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, tuple):
            return ",".join(map(str, v))
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key, attr in keys.items():
            value = getattr(cfg, attr)
            if attr == "eps":
                value = cfg.resolved_eps()
            elif attr == "eta":
                value = cfg.resolved_eta()
            lines.append(f"{key} = {fmt(value)}")
        lines.append("")
    lines.append("[substructure]")
    lines.append(f"clique_sizes = {fmt(cfg.substructure.clique_sizes)}")
    lines.append(f"normalization = {cfg.substructure.normalization}")
    lines.append("")
    lines.append("[encoder]")
    for f in fields(EncoderConfig):
        if f.name == "seed":
            continue
        lines.append(f"{f.name} = {fmt(getattr(cfg.encoder, f.name))}")
    lines.append("")
    if extra:
        lines.append("[manifest]")
        lines += [f"{k} = {v}" for k, v in extra.items()]
        lines.append("")
    return "\n".join(lines)


class StageFailure(CohesionGCLError):
    """Wraps an error from one pipeline stage, keeping the original exit code."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{stage}] {cause}")


def load_dataset(cfg: PipelineConfig) -> GraphDataset:
    if cfg.dataset_path:
        directory = Path(cfg.dataset_path)
        if not directory.is_dir():
            raise IoError(f"dataset directory {directory} does not exist")
        ds = load_tu_dataset(directory, cfg.dataset_name or directory.name)
    else:
        ds = generate_synthetic(cfg.synthetic, cfg.n_graphs, cfg.seed)
    if cfg.node_features == "degree":
        ds = degree_one_hot(ds)
    return ds


def _fmt_row(values) -> list[str]:
    return [repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in values]


def run_pipeline(cfg: PipelineConfig, write: bool = True) -> dict:
    """Load, featurize, train one encoder per property, fuse, probe.

    Outputs under ``cfg.out``: ``manifest.txt``, ``embeddings.csv``,
    ``metrics.csv``, ``state.<property>.bin`` and ``loss.<property>.csv``.
    """
    out = Path(cfg.out)
    versions = {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }

    def manifest(status, stage=""):
        if write:
            extra = {"status": status, "failed_stage": stage, **versions}
            (out / "manifest.txt").write_text(format_config(cfg, extra))

    if write:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StageFailure("setup", IoError(str(exc))) from exc
    manifest("running")

    stage = "load"
    try:
        ds = load_dataset(cfg)
        stage = "features"
        enc = replace(cfg.encoder, seed=cfg.seed)
        subs = ogsn_features(ds, cfg.substructure, cache=False, jobs=cfg.jobs) if enc.use_ogsn else None
        eps = cfg.resolved_eps()
        per_property, losses = [], {}
        for prop in cfg.properties:
            stage = f"train:{prop}"
            plans = make_plans(ds.graphs, prop, cfg.p_dr, eps, cfg.f_kind)
            state = train(ds.graphs, subs, enc, prop, eps, cfg.f_kind, cfg.p_dr, plans=plans, jobs=cfg.jobs)
            losses[prop] = list(state.loss_history)
            per_property.append(encode_batch(ds.graphs, subs, state, enc))
            if write:
                save_state(state, out / f"state.{prop}.bin")
        stage = "fuse"
        embeddings = fuse_embeddings(per_property)
        stage = "evaluate"
        report = repeated_probe(embeddings, ds.labels, cfg.folds, cfg.repeats, cfg.l2, cfg.seed, ds.class_count)
        stage = "write"
        if write:
            _write_outputs(out, ds, embeddings, report, losses)
    except CohesionGCLError as exc:
        manifest("failed", stage)
        raise StageFailure(stage, exc) from exc
    except OSError as exc:
        manifest("failed", stage)
        raise StageFailure(stage, IoError(str(exc))) from exc
    manifest("complete")
    return {
        "dataset": ds.name,
        "graphs": len(ds),
        "eps": eps,
        "mean_accuracy": report.mean,
        "std_accuracy": report.std,
        "rows": report.rows,
        "sanity_ok": report.sanity_ok,
        "losses": losses,
        "embeddings": embeddings,
    }


def metrics_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fold", "repeat", "accuracy", "precision", "recall"])
    for r in rows:
        w.writerow(_fmt_row(r))
    return buf.getvalue()


def _write_outputs(out: Path, ds: GraphDataset, embeddings, report, losses) -> None:
    (out / "metrics.csv").write_text(metrics_csv(report.rows))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["graph", "label"] + [f"e{i}" for i in range(embeddings.shape[1])])
    for gi, (row, y) in enumerate(zip(embeddings, ds.labels)):
        w.writerow([gi, int(y)] + _fmt_row(row))
    (out / "embeddings.csv").write_text(buf.getvalue())
    for prop, hist in losses.items():
        lines = ["step,loss"] + [f"{i},{v!r}" for i, v in enumerate(hist)]
        (out / f"loss.{prop}.csv").write_text("\n".join(lines) + "\n")


def summary_line(report: dict) -> str:
    return (f"{report['dataset']}: mean accuracy {report['mean_accuracy']:.4f} "
            f"+/- {report['std_accuracy']:.4f} over {len(report['rows'])} folds")
