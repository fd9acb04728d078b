"""Cohesion-aware graph contrastive learning at desk scale."""

__version__ = "0.1.0"

from .graph import Graph, GraphDataset, induced_subgraph, load_tu_dataset, validate_graph
from .cohesion import cohesion_feature_vector, cohesive_node_set, core_numbers, truss_numbers
from .augment import (
    ppr_diffusion,
    preservation_ratio,
    refined_drop_plan,
    reweight_edges,
    sample_edge_drop,
    sample_node_drop,
    vertex_importance_det,
    vertex_importance_prob,
)
from .substructure import SubstructureSpec, count_cliques_per_node, ogsn_features
from .encoder import EncoderConfig, encode, fuse_embeddings, gradcheck, init_state, ntxent_loss, train
from .evaluation import LinearProbe, cohesion_baseline, kfold_splits, metrics, train_linear_probe
from .estimators import CohesionCountFeatures, ContrastiveGraphEncoder, make_multi_cohesion_encoder
from .synthetic import generate_synthetic

__all__ = [
    "Graph", "GraphDataset", "induced_subgraph", "load_tu_dataset", "validate_graph",
    "cohesion_feature_vector", "cohesive_node_set", "core_numbers", "truss_numbers",
    "ppr_diffusion", "preservation_ratio", "refined_drop_plan", "reweight_edges",
    "sample_edge_drop", "sample_node_drop", "vertex_importance_det", "vertex_importance_prob",
    "SubstructureSpec", "count_cliques_per_node", "ogsn_features",
    "EncoderConfig", "encode", "fuse_embeddings", "gradcheck", "init_state", "ntxent_loss", "train",
    "LinearProbe", "cohesion_baseline", "kfold_splits", "metrics", "train_linear_probe",
    "CohesionCountFeatures", "ContrastiveGraphEncoder", "make_multi_cohesion_encoder",
    "generate_synthetic",
]
