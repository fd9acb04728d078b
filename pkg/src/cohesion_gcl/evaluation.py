"""Linear-probe evaluation of frozen graph embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .cohesion import cohesion_feature_vector
from .errors import ArgumentError, DegenerateFoldError
from .graph import GraphDataset


@dataclass(frozen=True)
class FoldPlan:
    fold_count: int
    assignments: np.ndarray
    seed: int

    def split(self, fold: int):
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def kfold_splits(n: int, k: int = 10, seed: int = 0) -> FoldPlan:
    """Seeded shuffle followed by contiguous chunking; sizes differ by at most one."""
    if not 2 <= k <= n:
        raise ArgumentError(f"need 2 <= k <= n, got k={k}, n={n}")
    order = np.random.default_rng([int(seed), 0x666F]).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    for fold, chunk in enumerate(np.array_split(order, k)):
        assignments[chunk] = fold
    return FoldPlan(k, assignments, int(seed))


class LinearProbe(ClassifierMixin, BaseEstimator):
    """Multinomial logistic regression fit by full-batch gradient descent.

    Inputs are standardized with the training statistics; the weights start
    at zero so the fit is deterministic.
    """

    def __init__(self, l2=1e-4, n_iter=500, learning_rate=0.1, standardize=True):
        self.l2 = l2
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, yi = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise DegenerateFoldError("training data holds a single class")
        if self.standardize:
            self.mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            self.scale_ = np.where(scale > 0, scale, 1.0)
        else:
            self.mean_ = np.zeros(X.shape[1])
            self.scale_ = np.ones(X.shape[1])
        Xs = (X - self.mean_) / self.scale_
        n, d = Xs.shape
        c = len(self.classes_)
        onehot = np.zeros((n, c))
        onehot[np.arange(n), yi] = 1.0
        W = np.zeros((d, c))
        b = np.zeros(c)
        for _ in range(self.n_iter):
            logits = Xs @ W + b
            logits -= logits.max(axis=1, keepdims=True)
            prob = np.exp(logits)
            prob /= prob.sum(axis=1, keepdims=True)
            diff = (prob - onehot) / n
            W -= self.learning_rate * (Xs.T @ diff + self.l2 * W)
            b -= self.learning_rate * diff.sum(axis=0)
        self.coef_ = W.T
        self.intercept_ = b
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return ((X - self.mean_) / self.scale_) @ self.coef_.T + self.intercept_

    def predict_proba(self, X):
        logits = self.decision_function(X)
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


def metrics(preds, labels, class_count: int) -> dict:
    """Accuracy and macro-averaged precision/recall over ``class_count`` classes."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.size == 0 or preds.shape != labels.shape:
        raise ArgumentError("preds and labels must be non-empty and aligned")
    precision, recall = [], []
    for c in range(class_count):
        tp = np.sum((preds == c) & (labels == c))
        predicted = np.sum(preds == c)
        actual = np.sum(labels == c)
        precision.append(tp / predicted if predicted else 0.0)
        recall.append(tp / actual if actual else 0.0)
    return {
        "accuracy": float(np.mean(preds == labels)),
        "macro_precision": float(np.mean(precision)),
        "macro_recall": float(np.mean(recall)),
    }


@dataclass
class ProbeReport:
    rows: list  # (fold, repeat, accuracy, precision, recall)
    sanity_ok: bool

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def mean(self) -> float:
        return float(self.accuracies.mean())

    @property
    def std(self) -> float:
        return float(self.accuracies.std())


def train_linear_probe(embeddings, labels, plan: FoldPlan, l2: float = 1e-4, seed: int = 0,
                       repeat: int = 0, class_count: int | None = None) -> ProbeReport:
    """Fit on all folds but one, score the held-out fold, for every fold.

    ``sanity_ok`` records whether every fold's training accuracy reached the
    majority-class rate of that training fold.
    """
    X = np.asarray(embeddings, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if not np.all(np.isfinite(X)):
        raise ArgumentError("embeddings contain non-finite values")
    class_count = class_count or int(y.max()) + 1
    rows, ok = [], True
    for fold in range(plan.fold_count):
        train, test = plan.split(fold)
        probe = LinearProbe(l2=l2).fit(X[train], y[train])
        majority = np.bincount(y[train]).max() / len(train)
        ok &= bool(probe.score(X[train], y[train]) + 1e-12 >= majority)
        m = metrics(probe.predict(X[test]), y[test], class_count)
        rows.append((fold, repeat, m["accuracy"], m["macro_precision"], m["macro_recall"]))
    return ProbeReport(rows, ok)


def repeated_probe(embeddings, labels, folds: int = 10, repeats: int = 1, l2: float = 1e-4,
                   seed: int = 0, class_count: int | None = None) -> ProbeReport:
    """``repeats`` rounds of k-fold probing, each with its own fold shuffle."""
    rows, ok = [], True
    for r in range(repeats):
        plan = kfold_splits(len(labels), folds, seed + r)
        rep = train_linear_probe(embeddings, labels, plan, l2, seed + r, r, class_count)
        rows += rep.rows
        ok &= rep.sanity_ok
    return ProbeReport(rows, ok)


def cohesion_baseline(ds: GraphDataset, K: int = 10, properties=("core",), plan: FoldPlan | None = None,
                      l2: float = 1e-4, seed: int = 0) -> ProbeReport:
    """Probe accuracy of the i-core / i-truss node-count features."""
    X = np.vstack([cohesion_feature_vector(g, K, properties) for g in ds.graphs])
    plan = plan or kfold_splits(len(ds), 10, seed)
    return train_linear_probe(X, ds.labels, plan, l2, seed, class_count=ds.class_count)
