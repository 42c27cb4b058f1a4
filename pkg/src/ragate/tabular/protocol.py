"""Grid search, family selection, and the final voting gate.

The selection protocol: hold out a seeded 100-row validation split, grid
search every family with three seeds per setting, score settings by
downstream validation In-Accuracy (the correctness of the answer each
predicted decision would surface), rank families, retrain the top two on
the full training set, and soft-vote them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..core import QuestionRecord, answer_is_correct
from .base import (
    FAMILY_ORDER,
    DegenerateData,
    EmptyGrid,
    InvalidHyperparameter,
    ModelSpec,
    TabularDataset,
)
from .grids import FAMILY_CLASSES, canonical_key
from .scaler import Scaler, fit_scaler, scaler_from_dict, scaler_to_dict, transform
from .voting import VotingModel

SELECTION_THRESHOLD = 0.5


def train(spec: ModelSpec, data: TabularDataset):
    """Fit one family member; unknown hyperparameter names are rejected."""
    cls = FAMILY_CLASSES[spec.family]
    unknown = set(spec.params) - set(cls.PARAMS)
    if unknown:
        raise InvalidHyperparameter(f"{spec.family} does not take {sorted(unknown)}")
    model = cls(**spec.params, seed=spec.seed)
    return model.fit(data.X, data.y)


@dataclass(frozen=True)
class EvalSplit:
    """Validation features plus the answer outcomes selection scoring needs."""

    data: TabularDataset
    correct_without: np.ndarray
    correct_with: np.ndarray

    @classmethod
    def from_records(cls, data: TabularDataset, records) -> "EvalSplit":
        if len(records) != data.n:
            raise ValueError(f"{len(records)} records for {data.n} feature rows")
        cwo = np.array([answer_is_correct(r.answer_without_retrieval, r.gold_answers) for r in records])
        cw = np.array([answer_is_correct(r.answer_with_retrieval, r.gold_answers) for r in records])
        return cls(data=data, correct_without=cwo, correct_with=cw)


def selection_in_accuracy(proba: np.ndarray, split: EvalSplit, threshold: float = SELECTION_THRESHOLD) -> float:
    decisions = np.asarray(proba) >= threshold
    chosen = np.where(decisions, split.correct_with, split.correct_without)
    return float(np.mean(chosen))


@dataclass
class GridSearchResult:
    family: str
    best_params: dict
    best_score: float
    history: list = field(default_factory=list)


def grid_search(family: str, grid_points: list[dict], train_data: TabularDataset, val: EvalSplit, seeds) -> GridSearchResult:
    """Mean downstream validation InAcc over seeds, per setting; argmax wins.

    Exact score ties go to the setting with the smaller canonical key
    (sorted-JSON encoding of its hyperparameters).
    """
    if not grid_points:
        raise EmptyGrid(f"no grid points for family {family!r}")
    best: tuple[float, str, dict] | None = None
    history = []
    for params in grid_points:
        scores = []
        for seed in seeds:
            model = train(ModelSpec(family=family, params=params, seed=int(seed)), train_data)
            scores.append(selection_in_accuracy(model.predict_proba(val.data.X), val))
        mean_score = float(np.mean(scores))
        key = canonical_key(params)
        history.append({"params": params, "score": mean_score})
        if best is None or mean_score > best[0] or (mean_score == best[0] and key < best[1]):
            best = (mean_score, key, params)
    return GridSearchResult(family=family, best_params=best[2], best_score=best[0], history=history)


@dataclass
class GateModel:
    """Scaler + voting pair + the feature layout they were trained on."""

    feature_names: tuple[str, ...]
    feature_groups: tuple[str, ...]
    scaler: Scaler
    voting: VotingModel
    provenance: dict = field(default_factory=dict)

    def predict_proba(self, X_raw: np.ndarray) -> np.ndarray:
        return self.voting.predict_proba(transform(self.scaler, X_raw))


def end_to_end_train(
    data: TabularDataset,
    records,
    grids_by_family: dict[str, list[dict]],
    master_seed: int = 0,
    val_size: int = 100,
    feature_groups: tuple[str, ...] | None = None,
) -> GateModel:
    """Run the full selection protocol and return the fitted gate.

    ``records`` align with ``data`` rows and provide the stored answers the
    validation metric scores against. Needs at least val_size + 20 rows and
    at least two families in the grids.
    """
    n = data.n
    if len(records) != n:
        raise ValueError(f"{len(records)} records for {n} feature rows")
    if n < val_size + 20:
        raise DegenerateData(f"need at least {val_size + 20} rows for a {val_size}-row validation split, got {n}")
    families = [f for f in FAMILY_ORDER if f in grids_by_family]
    if len(families) < 2:
        raise DegenerateData(f"voting needs at least 2 families, grids provide {families}")

    rng = np.random.default_rng(master_seed)
    perm = rng.permutation(n)
    val_idx, train_idx = perm[:val_size], perm[val_size:]

    scaler = fit_scaler(data.X[train_idx])
    X_scaled = transform(scaler, data.X)
    train_data = TabularDataset(X_scaled[train_idx], data.y[train_idx], data.feature_names)
    val = EvalSplit.from_records(
        TabularDataset(X_scaled[val_idx], data.y[val_idx], data.feature_names),
        [records[i] for i in val_idx],
    )

    seeds = (master_seed, master_seed + 1, master_seed + 2)
    results = {f: grid_search(f, grids_by_family[f], train_data, val, seeds) for f in families}
    ranking = sorted(families, key=lambda f: (-results[f].best_score, FAMILY_ORDER.index(f)))
    selected = ranking[:2]

    full_data = TabularDataset(X_scaled, data.y, data.feature_names)
    members = tuple(
        train(ModelSpec(family=f, params=results[f].best_params, seed=master_seed), full_data) for f in selected
    )
    voting = VotingModel(families=tuple(selected), members=members)

    provenance = {
        "master_seed": master_seed,
        "seeds": list(seeds),
        "val_size": val_size,
        "val_indices": [int(i) for i in val_idx],
        "families": {
            f: {"best_params": r.best_params, "score": r.best_score, "history": r.history}
            for f, r in results.items()
        },
        "ranking": [[f, results[f].best_score] for f in ranking],
        "selected": list(selected),
    }
    groups = tuple(feature_groups) if feature_groups is not None else ("feature",) * len(data.feature_names)
    if len(groups) != len(data.feature_names):
        raise ValueError("feature_groups length does not match feature_names")
    return GateModel(
        feature_names=tuple(data.feature_names),
        feature_groups=groups,
        scaler=scaler,
        voting=voting,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# Gate artifact I/O
# ---------------------------------------------------------------------------


def gate_to_dict(model: GateModel) -> dict:
    return {
        "kind": "retrieval-gate",
        "feature_names": list(model.feature_names),
        "feature_groups": list(model.feature_groups),
        "scaler": scaler_to_dict(model.scaler),
        "members": [
            {"family": family, "state": member.to_dict()}
            for family, member in zip(model.voting.families, model.voting.members)
        ],
        "provenance": model.provenance,
    }


def save_gate(model: GateModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gate_to_dict(model), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def gate_from_dict(obj: dict) -> GateModel:
    if obj.get("kind") != "retrieval-gate":
        raise ValueError("not a retrieval-gate artifact")
    members = []
    families = []
    for entry in obj["members"]:
        family = entry["family"]
        if family not in FAMILY_CLASSES:
            raise ValueError(f"artifact names unknown family {family!r}")
        families.append(family)
        members.append(FAMILY_CLASSES[family].from_dict(entry["state"]))
    return GateModel(
        feature_names=tuple(obj["feature_names"]),
        feature_groups=tuple(obj["feature_groups"]),
        scaler=scaler_from_dict(obj["scaler"]),
        voting=VotingModel(families=tuple(families), members=tuple(members)),
        provenance=obj.get("provenance", {}),
    )


def load_gate(path) -> GateModel:
    with open(path, encoding="utf-8") as fh:
        return gate_from_dict(json.load(fh))
