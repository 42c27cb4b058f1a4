"""CART-style binary trees shared by the tree, boosting, and forest families.

One grower handles weighted gini/entropy classification and mse regression
(for boosting residuals). Split search is exact over midpoints between
distinct sorted values ("best") or samples one uniform threshold per
candidate feature ("random"); max_features subsamples candidates per node.
Ties keep the first candidate encountered, so trees are reproducible for a
fixed rng.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .base import InvalidHyperparameter

_CRITERIA_CLS = ("gini", "entropy")
_SPLITTERS = ("best", "random")


@dataclass
class TreeNode:
    value: float
    n_samples: int
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def resolve_max_features(max_features, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(math.log2(n_features)))
    if isinstance(max_features, bool):
        raise InvalidHyperparameter("max_features must not be boolean")
    if isinstance(max_features, float):
        if not 0.0 < max_features <= 1.0:
            raise InvalidHyperparameter(f"fractional max_features must be in (0, 1], got {max_features}")
        return max(1, int(max_features * n_features))
    if isinstance(max_features, int):
        if max_features < 1:
            raise InvalidHyperparameter(f"max_features must be >= 1, got {max_features}")
        return min(max_features, n_features)
    raise InvalidHyperparameter(f"unsupported max_features {max_features!r}")


def _impurity_sum(w_pos: np.ndarray, w_tot: np.ndarray, criterion: str) -> np.ndarray:
    """Weighted child impurity; shapes broadcast, w_tot > 0 required."""
    p = w_pos / w_tot
    if criterion == "gini":
        return w_tot * 2.0 * p * (1.0 - p)
    return -(xlogy(w_pos, p) + xlogy(w_tot - w_pos, 1.0 - p))


def _children_score(y, w, mask, criterion) -> float:
    if criterion in _CRITERIA_CLS:
        parts = []
        for side in (mask, ~mask):
            wt = float(np.sum(w[side]))
            wp = float(np.sum(w[side] * y[side]))
            parts.append(float(_impurity_sum(np.float64(wp), np.float64(wt), criterion)))
        return parts[0] + parts[1]
    score = 0.0
    for side in (mask, ~mask):
        wt = float(np.sum(w[side]))
        wy = float(np.sum(w[side] * y[side]))
        wy2 = float(np.sum(w[side] * y[side] ** 2))
        score += wy2 - wy * wy / wt
    return score


def _best_split(v: np.ndarray, y: np.ndarray, w: np.ndarray, criterion: str):
    order = np.argsort(v, kind="stable")
    vs, ys, ws = v[order], y[order], w[order]
    cut = np.nonzero(vs[1:] > vs[:-1])[0]
    if cut.size == 0:
        return None
    cw = np.cumsum(ws)
    if criterion in _CRITERIA_CLS:
        cwp = np.cumsum(ws * ys)
        lw, lp = cw[cut], cwp[cut]
        rw, rp = cw[-1] - lw, cwp[-1] - lp
        score = _impurity_sum(lp, lw, criterion) + _impurity_sum(rp, rw, criterion)
    else:
        cwy = np.cumsum(ws * ys)
        cwy2 = np.cumsum(ws * ys * ys)
        lw, ly, ly2 = cw[cut], cwy[cut], cwy2[cut]
        rw, ry, ry2 = cw[-1] - lw, cwy[-1] - ly, cwy2[-1] - ly2
        score = (ly2 - ly * ly / lw) + (ry2 - ry * ry / rw)
    j = int(np.argmin(score))
    threshold = 0.5 * (vs[cut[j]] + vs[cut[j] + 1])
    # Midpoint can round onto the upper value; fall back to the lower one so
    # the left child keeps at least the samples at vs[cut[j]].
    if threshold >= vs[cut[j] + 1]:
        threshold = vs[cut[j]]
    return threshold, float(score[j])


def _random_split(v: np.ndarray, y: np.ndarray, w: np.ndarray, criterion: str, rng):
    lo, hi = float(np.min(v)), float(np.max(v))
    if lo == hi:
        return None
    threshold = float(rng.uniform(lo, hi))
    mask = v <= threshold
    if mask.all() or not mask.any():
        return None
    return threshold, _children_score(y, w, mask, criterion)


class _GrowContext:
    def __init__(self, X, targets, weights, criterion, splitter, max_depth, max_feats, rng, leaf_value, min_samples_split):
        self.X = X
        self.targets = targets
        self.weights = weights
        self.criterion = criterion
        self.splitter = splitter
        self.max_depth = max_depth
        self.max_feats = max_feats
        self.rng = rng
        self.leaf_value = leaf_value
        self.min_samples_split = min_samples_split


def grow_tree(
    X: np.ndarray,
    targets: np.ndarray,
    sample_weight: np.ndarray | None = None,
    *,
    criterion: str = "gini",
    splitter: str = "best",
    max_depth: int | None = None,
    max_features=None,
    rng=None,
    leaf_value=None,
    min_samples_split: int = 2,
) -> TreeNode:
    """Grow one tree; ``leaf_value(idx)`` maps sample indices to a leaf value."""
    if criterion not in _CRITERIA_CLS + ("mse",):
        raise InvalidHyperparameter(f"unknown criterion {criterion!r}")
    if splitter not in _SPLITTERS:
        raise InvalidHyperparameter(f"splitter must be one of {_SPLITTERS}, got {splitter!r}")
    if max_depth is not None and max_depth < 1:
        raise InvalidHyperparameter(f"max_depth must be >= 1 or None, got {max_depth}")
    X = np.asarray(X, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if sample_weight is None:
        sample_weight = np.ones(X.shape[0])
    if leaf_value is None:
        leaf_value = lambda idx: float(  # noqa: E731 - default: weighted mean
            np.sum(sample_weight[idx] * targets[idx]) / np.sum(sample_weight[idx])
        )
    ctx = _GrowContext(
        X,
        targets,
        sample_weight,
        criterion,
        splitter,
        max_depth,
        resolve_max_features(max_features, X.shape[1]),
        rng if rng is not None else np.random.default_rng(0),
        leaf_value,
        min_samples_split,
    )
    return _grow(ctx, np.arange(X.shape[0]), depth=0)


def _grow(ctx: _GrowContext, idx: np.ndarray, depth: int) -> TreeNode:
    value = float(ctx.leaf_value(idx))
    node = TreeNode(value=value, n_samples=int(idx.size))
    t = ctx.targets[idx]
    if (
        idx.size < ctx.min_samples_split
        or (ctx.max_depth is not None and depth >= ctx.max_depth)
        or np.all(t == t[0])
    ):
        return node

    n_features = ctx.X.shape[1]
    if ctx.max_feats < n_features:
        feats = ctx.rng.choice(n_features, size=ctx.max_feats, replace=False)
    else:
        feats = np.arange(n_features)

    w = ctx.weights[idx]
    best = None
    for f in feats:
        v = ctx.X[idx, f]
        if ctx.splitter == "best":
            found = _best_split(v, t, w, ctx.criterion)
        else:
            found = _random_split(v, t, w, ctx.criterion, ctx.rng)
        if found is not None and (best is None or found[1] < best[2]):
            best = (int(f), found[0], found[1])
    if best is None:
        return node

    node.feature, node.threshold = best[0], best[1]
    mask = ctx.X[idx, node.feature] <= node.threshold
    node.left = _grow(ctx, idx[mask], depth + 1)
    node.right = _grow(ctx, idx[~mask], depth + 1)
    return node


def tree_predict(node: TreeNode, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0])
    _route(node, X, np.arange(X.shape[0]), out)
    return out


def _route(node: TreeNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if idx.size == 0:
        return
    if node.is_leaf:
        out[idx] = node.value
        return
    mask = X[idx, node.feature] <= node.threshold
    _route(node.left, X, idx[mask], out)
    _route(node.right, X, idx[~mask], out)


def tree_to_dict(node: TreeNode) -> dict:
    obj = {"value": node.value, "n": node.n_samples}
    if not node.is_leaf:
        obj["feature"] = node.feature
        obj["threshold"] = node.threshold
        obj["left"] = tree_to_dict(node.left)
        obj["right"] = tree_to_dict(node.right)
    return obj


def tree_from_dict(obj: dict) -> TreeNode:
    node = TreeNode(value=float(obj["value"]), n_samples=int(obj["n"]))
    if "feature" in obj:
        node.feature = int(obj["feature"])
        node.threshold = float(obj["threshold"])
        node.left = tree_from_dict(obj["left"])
        node.right = tree_from_dict(obj["right"])
    return node


def laplace_leaf(targets: np.ndarray, weights: np.ndarray):
    """Leaf probability (w_pos + 1)/(w_total + 2): never exactly 0 or 1."""

    def leaf_value(idx) -> float:
        w = weights[idx]
        return float((np.sum(w * targets[idx]) + 1.0) / (np.sum(w) + 2.0))

    return leaf_value


class DecisionTreeModel:
    family = "dtree"
    PARAMS = frozenset({"max_depth", "max_features", "criterion", "splitter"})

    def __init__(self, max_depth=None, max_features=None, criterion: str = "gini", splitter: str = "best", seed: int = 0):
        if criterion not in _CRITERIA_CLS:
            raise InvalidHyperparameter(f"criterion must be one of {_CRITERIA_CLS}, got {criterion!r}")
        self.max_depth = max_depth
        self.max_features = max_features
        self.criterion = criterion
        self.splitter = splitter
        self.seed = seed
        self.tree: TreeNode | None = None

    def get_params(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "criterion": self.criterion,
            "splitter": self.splitter,
        }

    def fit(self, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None) -> "DecisionTreeModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if sample_weight is None:
            sample_weight = np.ones(X.shape[0])
        self.tree = grow_tree(
            X,
            y,
            sample_weight,
            criterion=self.criterion,
            splitter=self.splitter,
            max_depth=self.max_depth,
            max_features=self.max_features,
            rng=np.random.default_rng(self.seed),
            leaf_value=laplace_leaf(y, sample_weight),
        )
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.tree is None:
            raise RuntimeError("model is not fitted")
        return tree_predict(self.tree, X)

    def to_dict(self) -> dict:
        return {"params": self.get_params(), "seed": self.seed, "tree": tree_to_dict(self.tree)}

    @classmethod
    def from_dict(cls, obj: dict) -> "DecisionTreeModel":
        model = cls(**obj["params"], seed=obj["seed"])
        model.tree = tree_from_dict(obj["tree"])
        return model
