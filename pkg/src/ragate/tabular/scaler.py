"""Per-column z-score scaling with an explicit zero-variance convention."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray  # population std; exactly 0 marks a constant column


def fit_scaler(X: np.ndarray) -> Scaler:
    X = np.asarray(X, dtype=np.float64)
    return Scaler(mean=X.mean(axis=0), std=X.std(axis=0))


def transform(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    """z-score columns by the fitted statistics; constant columns map to 0."""
    X = np.asarray(X, dtype=np.float64)
    safe = np.where(scaler.std == 0.0, 1.0, scaler.std)
    out = (X - scaler.mean) / safe
    out[:, scaler.std == 0.0] = 0.0
    return out


def scaler_to_dict(scaler: Scaler) -> dict:
    return {
        "mean": [float(v) for v in scaler.mean],
        "std": [float(v) for v in scaler.std],
    }


def scaler_from_dict(obj: dict) -> Scaler:
    return Scaler(
        mean=np.asarray(obj["mean"], dtype=np.float64),
        std=np.asarray(obj["std"], dtype=np.float64),
    )
