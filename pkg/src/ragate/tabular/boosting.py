"""Gradient-boosted trees on logistic loss with Newton leaf updates."""

from __future__ import annotations

import numpy as np

from .base import InvalidHyperparameter, check_two_classes
from .trees import grow_tree, tree_from_dict, tree_predict, tree_to_dict

_LEAF_EPS = 1e-12


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(raw: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-likelihood of labels under logits ``raw``."""
    y_pm = np.where(y == 1, 1.0, -1.0)
    return float(np.mean(np.logaddexp(0.0, -y_pm * raw)))


class GradientBoostingModel:
    family = "gboost"
    PARAMS = frozenset({"n_estimators", "learning_rate", "max_depth", "max_features"})

    def __init__(self, n_estimators: int = 50, learning_rate: float = 0.05, max_depth: int = 3, max_features=None, seed: int = 0):
        if n_estimators < 1:
            raise InvalidHyperparameter(f"n_estimators must be >= 1, got {n_estimators}")
        if not learning_rate > 0:
            raise InvalidHyperparameter(f"learning_rate must be positive, got {learning_rate}")
        self.n_estimators = int(n_estimators)
        self.learning_rate = float(learning_rate)
        self.max_depth = max_depth
        self.max_features = max_features
        self.seed = seed
        self.base_score: float = 0.0
        self.trees: list = []
        self.train_loss_history: list[float] = []

    def get_params(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
        }

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoostingModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        check_two_classes(y.astype(np.int64), self.family)
        rng = np.random.default_rng(self.seed)

        prior = float(np.mean(y))
        self.base_score = float(np.log(prior / (1.0 - prior)))
        raw = np.full(X.shape[0], self.base_score)
        self.trees = []
        self.train_loss_history = [logistic_loss(raw, y)]
        for _ in range(self.n_estimators):
            p = _sigmoid(raw)
            residual = y - p  # negative gradient of the logistic loss
            hessian = p * (1.0 - p)

            def newton_leaf(idx, residual=residual, hessian=hessian) -> float:
                return float(np.sum(residual[idx]) / (np.sum(hessian[idx]) + _LEAF_EPS))

            tree = grow_tree(
                X,
                residual,
                criterion="mse",
                splitter="best",
                max_depth=self.max_depth,
                max_features=self.max_features,
                rng=rng,
                leaf_value=newton_leaf,
            )
            self.trees.append(tree)
            raw = raw + self.learning_rate * tree_predict(tree, X)
            self.train_loss_history.append(logistic_loss(raw, y))
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        raw = np.full(np.asarray(X).shape[0], self.base_score)
        for tree in self.trees:
            raw = raw + self.learning_rate * tree_predict(tree, X)
        return raw

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise RuntimeError("model is not fitted")
        return _sigmoid(self.decision_function(X))

    def to_dict(self) -> dict:
        return {
            "params": self.get_params(),
            "seed": self.seed,
            "base_score": self.base_score,
            "trees": [tree_to_dict(t) for t in self.trees],
            "train_loss_history": self.train_loss_history,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GradientBoostingModel":
        model = cls(**obj["params"], seed=obj["seed"])
        model.base_score = float(obj["base_score"])
        model.trees = [tree_from_dict(t) for t in obj["trees"]]
        model.train_loss_history = [float(v) for v in obj.get("train_loss_history", [])]
        return model
