"""scikit-learn compatible wrappers.

``X`` is always a sequence of :class:`~cohesion_gcl.graph.Graph` (or a
``GraphDataset``); outputs are dense arrays, so these compose with
``Pipeline``, ``FeatureUnion`` and ``cross_val_score``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.pipeline import FeatureUnion
from sklearn.utils.validation import check_is_fitted

from .cohesion import cohesion_feature_vector
from .encoder import EncoderConfig, encode_batch, train
from .graph import check_graphs, node_feature_matrix
from .substructure import count_cliques_per_node, normalize_counts
from .errors import ArgumentError


class CohesionCountFeatures(TransformerMixin, BaseEstimator):
    """Node counts of the i-core / i-truss subgraphs as a fixed-length vector."""

    def __init__(self, K=10, properties=("core",)):
        self.K = K
        self.properties = properties

    def fit(self, X, y=None):
        check_graphs(X)
        self.n_features_out_ = self.K * len(set(self.properties))
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        return np.vstack([cohesion_feature_vector(g, self.K, self.properties) for g in check_graphs(X)])


class ContrastiveGraphEncoder(TransformerMixin, BaseEstimator):
    """Self-supervised graph encoder trained on cohesion-aware node-drop views.

    ``fit`` trains on the given graphs (labels are ignored); ``transform``
    returns the sum-pooled embeddings of the graphs as given, i.e. with
    substructure counts taken from those (original) graphs.
    """

    def __init__(self, cohesion="core", eps=0.2, f_kind="square", p_dr=0.2, use_ogsn=True,
                 clique_sizes=(3, 4, 5), normalization="log1p", layer_count=3, hidden_dim=32,
                 tau=0.2, epochs=20, batch_size=16, learning_rate=1e-3, optimizer="adam",
                 seed=0, jobs=1):
        self.cohesion = cohesion
        self.eps = eps
        self.f_kind = f_kind
        self.p_dr = p_dr
        self.use_ogsn = use_ogsn
        self.clique_sizes = clique_sizes
        self.normalization = normalization
        self.layer_count = layer_count
        self.hidden_dim = hidden_dim
        self.tau = tau
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.seed = seed
        self.jobs = jobs

    def _config(self) -> EncoderConfig:
        return EncoderConfig(
            layer_count=self.layer_count, hidden_dim=self.hidden_dim, use_ogsn=self.use_ogsn,
            tau=self.tau, epochs=self.epochs, batch_size=self.batch_size,
            learning_rate=self.learning_rate, optimizer=self.optimizer, seed=self.seed,
        )

    def _substructures(self, graphs):
        if not self.use_ogsn:
            return None
        return [normalize_counts(count_cliques_per_node(g, self.clique_sizes), self.normalization) for g in graphs]

    def fit(self, X, y=None, substructures=None):
        graphs = check_graphs(X)
        subs = substructures if substructures is not None else self._substructures(graphs)
        self.config_ = self._config()
        self.state_ = train(graphs, subs, self.config_, self.cohesion, self.eps, self.f_kind,
                            self.p_dr, jobs=self.jobs)
        self.feature_dim_ = node_feature_matrix(graphs[0]).shape[1]
        self.loss_history_ = list(self.state_.loss_history)
        return self

    def transform(self, X, substructures=None):
        check_is_fitted(self, "state_")
        graphs = check_graphs(X)
        if node_feature_matrix(graphs[0]).shape[1] != self.feature_dim_:
            raise ArgumentError("node feature width differs from the one seen in fit")
        subs = substructures if substructures is not None else self._substructures(graphs)
        return encode_batch(graphs, subs, self.state_, self.config_)


def make_multi_cohesion_encoder(properties=("core", "truss"), **params) -> FeatureUnion:
    """One encoder per cohesion property, embeddings concatenated in the given order."""
    return FeatureUnion([(p, ContrastiveGraphEncoder(cohesion=p, **params)) for p in properties])
