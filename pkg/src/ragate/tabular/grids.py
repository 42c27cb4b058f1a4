"""Hyperparameter grids: bundled defaults, expansion, canonical ordering.

The grid file keeps a separate ``catboost`` section for fidelity to the
original search space; at load time it is expanded onto the gboost engine
(iterations -> n_estimators, depth -> max_depth) since the two families
share the boosted-tree implementation here.
"""

from __future__ import annotations

import itertools
import json
from importlib import resources

import yaml

from .base import FAMILY_ORDER, EmptyGrid, InvalidHyperparameter
from .boosting import GradientBoostingModel
from .forest import RandomForestModel
from .linear import LogisticRegressionModel
from .mlp import MLPModel
from .neighbors import KNNModel
from .trees import DecisionTreeModel

FAMILY_CLASSES = {
    "logreg": LogisticRegressionModel,
    "knn": KNNModel,
    "mlp": MLPModel,
    "dtree": DecisionTreeModel,
    "gboost": GradientBoostingModel,
    "rforest": RandomForestModel,
}

_CATBOOST_PARAM_MAP = {"iterations": "n_estimators", "learning_rate": "learning_rate", "depth": "max_depth"}


def canonical_key(params: dict) -> str:
    """Total order over hyperparameter settings (ties resolve by this key)."""
    return json.dumps(params, sort_keys=True, default=str)


def load_raw_grids(path=None) -> dict:
    """Parse a grid config file; None loads the bundled defaults."""
    if path is None:
        text = resources.files("ragate").joinpath("data", "default_grids.yaml").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        raise InvalidHyperparameter("grid config must be a mapping of family -> parameter lists")
    validate_grids(raw)
    return raw


def validate_grids(raw: dict) -> None:
    for family, grid in raw.items():
        if family == "catboost":
            allowed = set(_CATBOOST_PARAM_MAP)
        elif family in FAMILY_CLASSES:
            allowed = set(FAMILY_CLASSES[family].PARAMS)
        else:
            raise InvalidHyperparameter(f"unknown classifier family {family!r} in grid config")
        if not isinstance(grid, dict) or not grid:
            raise InvalidHyperparameter(f"grid for {family!r} must be a non-empty mapping")
        for name, values in grid.items():
            if name not in allowed:
                raise InvalidHyperparameter(f"{family} grid names unknown hyperparameter {name!r}")
            if isinstance(values, list) and not values:
                raise InvalidHyperparameter(f"{family}.{name} lists no candidate values")


def expand_grid(grid: dict) -> list[dict]:
    """Cartesian product in declared parameter order; scalars are fixed."""
    keys = list(grid.keys())
    value_lists = [v if isinstance(v, list) else [v] for v in grid.values()]
    return [dict(zip(keys, combo)) for combo in itertools.product(*value_lists)]


def expanded_family_grids(raw: dict) -> dict[str, list[dict]]:
    """Per-family candidate lists with catboost folded into gboost.

    Duplicate settings produced by the fold keep their first occurrence.
    """
    out: dict[str, list[dict]] = {}
    for family in FAMILY_ORDER:
        if family not in raw:
            continue
        out[family] = expand_grid(raw[family])
    if "catboost" in raw:
        mapped = {_CATBOOST_PARAM_MAP[k]: v for k, v in raw["catboost"].items()}
        extra = expand_grid(mapped)
        for point in extra:
            point.setdefault("max_features", None)
        merged = out.get("gboost", [])
        seen = {canonical_key(p) for p in merged}
        for point in extra:
            key = canonical_key(point)
            if key not in seen:
                merged.append(point)
                seen.add(key)
        out["gboost"] = merged
    for family, points in out.items():
        if not points:
            raise EmptyGrid(f"family {family!r} has no grid points")
    return out


def load_grids(path=None) -> dict[str, list[dict]]:
    """Expanded per-family grids from a config file (bundled default if None)."""
    return expanded_family_grids(load_raw_grids(path))
