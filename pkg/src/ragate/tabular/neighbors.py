"""Exact k-nearest-neighbour classifier (brute force, deterministic ties)."""

from __future__ import annotations

import numpy as np

from .base import InvalidHyperparameter

_METRICS = ("euclidean", "manhattan")
# Tree-based index names accepted for grid compatibility; search is always exact.
_ALGORITHMS = ("auto", "ball_tree", "kd_tree", "brute")
_WEIGHTS = ("uniform", "distance")


def pairwise_distances(A: np.ndarray, B: np.ndarray, metric: str) -> np.ndarray:
    diff = A[:, None, :] - B[None, :, :]
    if metric == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=2))
    return np.sum(np.abs(diff), axis=2)


class KNNModel:
    family = "knn"
    PARAMS = frozenset({"n_neighbors", "metric", "algorithm", "weights"})

    def __init__(self, n_neighbors: int = 5, metric: str = "euclidean", algorithm: str = "auto", weights: str = "uniform", seed: int = 0):
        if metric not in _METRICS:
            raise InvalidHyperparameter(f"metric must be one of {_METRICS}, got {metric!r}")
        if algorithm not in _ALGORITHMS:
            raise InvalidHyperparameter(f"algorithm must be one of {_ALGORITHMS}, got {algorithm!r}")
        if weights not in _WEIGHTS:
            raise InvalidHyperparameter(f"weights must be one of {_WEIGHTS}, got {weights!r}")
        if n_neighbors < 1:
            raise InvalidHyperparameter(f"n_neighbors must be >= 1, got {n_neighbors}")
        self.n_neighbors = int(n_neighbors)
        self.metric = metric
        self.algorithm = algorithm
        self.weights = weights
        self.seed = seed
        self.train_X: np.ndarray | None = None
        self.train_y: np.ndarray | None = None

    def get_params(self) -> dict:
        return {
            "n_neighbors": self.n_neighbors,
            "metric": self.metric,
            "algorithm": self.algorithm,
            "weights": self.weights,
        }

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNNModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if self.n_neighbors > X.shape[0]:
            raise InvalidHyperparameter(
                f"n_neighbors={self.n_neighbors} exceeds {X.shape[0]} training rows"
            )
        self.train_X = X
        self.train_y = y
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.train_X is None:
            raise RuntimeError("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        dist = pairwise_distances(X, self.train_X, self.metric)
        # Stable argsort breaks distance ties by training index.
        order = np.argsort(dist, axis=1, kind="stable")[:, : self.n_neighbors]
        probs = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            nbrs = order[i]
            labels = self.train_y[nbrs]
            if self.weights == "uniform":
                probs[i] = float(np.mean(labels))
                continue
            d = dist[i, nbrs]
            if np.any(d == 0.0):
                # Exact matches dominate: average the coincident points only.
                probs[i] = float(np.mean(labels[d == 0.0]))
            else:
                w = 1.0 / d
                probs[i] = float(np.sum(w * labels) / np.sum(w))
        return probs

    def to_dict(self) -> dict:
        return {
            "params": self.get_params(),
            "seed": self.seed,
            "train_X": [[float(v) for v in row] for row in self.train_X],
            "train_y": [int(v) for v in self.train_y],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "KNNModel":
        model = cls(**obj["params"], seed=obj["seed"])
        model.train_X = np.asarray(obj["train_X"], dtype=np.float64)
        model.train_y = np.asarray(obj["train_y"], dtype=np.int64)
        return model
