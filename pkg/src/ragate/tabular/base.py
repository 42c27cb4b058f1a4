"""Shared types for the tabular "retrieval needed" classifier suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateData(Exception):
    """The training data cannot support the requested fit."""


class InvalidHyperparameter(Exception):
    """A hyperparameter name or value is outside the family's domain."""


class EmptyGrid(Exception):
    """Grid search was asked to search zero candidate settings."""


FAMILY_ORDER = ("logreg", "knn", "mlp", "dtree", "gboost", "rforest")


@dataclass(frozen=True)
class TabularDataset:
    """Feature matrix + binary need-retrieval labels (1 = retrieve)."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"y shape {y.shape} does not match {X.shape[0]} rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("y must be 0/1")
        if len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names length does not match X columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def rows(self, idx) -> "TabularDataset":
        return TabularDataset(self.X[idx], self.y[idx], self.feature_names)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILY_ORDER:
            raise InvalidHyperparameter(f"unknown family {self.family!r}")


def check_two_classes(y: np.ndarray, family: str) -> None:
    if np.unique(y).size < 2:
        raise DegenerateData(f"{family} needs both classes present in y")


def balanced_class_weights(y: np.ndarray) -> dict[int, float]:
    """Inverse-frequency weights: n / (n_classes * count_c), sklearn-style."""
    n = y.shape[0]
    weights = {}
    for c in (0, 1):
        count = int(np.sum(y == c))
        weights[c] = n / (2.0 * count) if count else 0.0
    return weights


def resolve_sample_weights(y: np.ndarray, class_weight) -> np.ndarray:
    """Per-sample weights from a class_weight setting (None|'balanced'|dict)."""
    if class_weight is None:
        return np.ones(y.shape[0])
    if class_weight == "balanced":
        table = balanced_class_weights(y)
    elif isinstance(class_weight, dict):
        table = {int(k): float(v) for k, v in class_weight.items()}
        if set(table) != {0, 1}:
            raise InvalidHyperparameter(f"class_weight dict must cover classes 0 and 1, got {sorted(table)}")
    else:
        raise InvalidHyperparameter(f"unsupported class_weight {class_weight!r}")
    return np.array([table[int(c)] for c in y], dtype=np.float64)
