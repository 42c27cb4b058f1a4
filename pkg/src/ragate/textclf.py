"""Lightweight native text classifiers and the lexical relevance scorer.

Question-type and question-complexity signals come from multinomial
logistic regression over hashed unigram+bigram counts; context relevance
comes from a token-overlap F1. No pretrained models, no subword
tokenization, and fully deterministic given a seed.
"""

from __future__ import annotations

import json
import zlib
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy import sparse

from .core import tokenize

__all__ = [
    "DegenerateCorpus",
    "TextClfConfig",
    "TextClassifier",
    "train_text_classifier",
    "relevance_score",
    "softmax_loss_and_grad",
    "save_text_classifier",
    "load_text_classifier",
    "load_toy_corpus",
]

DEFAULT_DIM = 1 << 16
_BIGRAM_SEP = "\x1f"


class DegenerateCorpus(Exception):
    """Raised when a training corpus has fewer than two distinct labels."""


@dataclass(frozen=True)
class TextClfConfig:
    seed: int = 0
    epochs: int = 40
    learning_rate: float = 0.5
    dim: int = DEFAULT_DIM
    batch_size: int = 32


def _hash_index(key: str, dim: int) -> int:
    return zlib.crc32(key.encode("utf-8")) % dim


def featurize(text: str, dim: int) -> sparse.csr_matrix:
    """Hashed unigram+bigram count vector, shape (1, dim)."""
    tokens = tokenize(text)
    counts: Counter = Counter()
    for tok in tokens:
        counts[_hash_index(tok, dim)] += 1.0
    for a, b in zip(tokens, tokens[1:]):
        counts[_hash_index(a + _BIGRAM_SEP + b, dim)] += 1.0
    if not counts:
        return sparse.csr_matrix((1, dim))
    cols = np.fromiter(counts.keys(), dtype=np.int64)
    vals = np.fromiter(counts.values(), dtype=np.float64)
    rows = np.zeros_like(cols)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(1, dim))


def featurize_many(texts: list[str], dim: int) -> sparse.csr_matrix:
    if not texts:
        return sparse.csr_matrix((0, dim))
    return sparse.vstack([featurize(t, dim) for t in texts], format="csr")


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_loss_and_grad(weights: np.ndarray, bias: np.ndarray, X, labels: np.ndarray):
    """Mean cross-entropy of the softmax model and its exact gradients.

    weights: (n_classes, dim); bias: (n_classes,); X: (n, dim) sparse or
    dense; labels: (n,) integer class indices. Returns
    (loss, grad_weights, grad_bias).
    """
    n = X.shape[0]
    logits = np.asarray(X @ weights.T) + bias
    probs = _softmax(logits)
    eps = 1e-12
    loss = -np.mean(np.log(probs[np.arange(n), labels] + eps))
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    grad_w = np.asarray((X.T @ delta).T)
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


@dataclass
class TextClassifier:
    """Multinomial logistic regression over hashed text features."""

    class_names: tuple[str, ...]
    dim: int
    weights: np.ndarray
    bias: np.ndarray
    training_meta: dict = field(default_factory=dict)

    def predict_proba(self, text: str) -> np.ndarray:
        """Class probabilities in ``class_names`` order; sums to 1."""
        x = featurize(text, self.dim)
        logits = np.asarray(x @ self.weights.T) + self.bias
        return _softmax(logits)[0]

    def predict(self, text: str) -> str:
        return self.class_names[int(np.argmax(self.predict_proba(text)))]


def train_text_classifier(corpus: list[tuple[str, str]], config: TextClfConfig = TextClfConfig()) -> TextClassifier:
    """Train by mini-batch gradient descent on hashed unigram+bigram counts.

    Deterministic for a fixed config: the same corpus and seed produce
    byte-identical weights. Class names are the sorted distinct labels.
    Raises DegenerateCorpus when fewer than two labels are present.
    """
    if not corpus:
        raise DegenerateCorpus("empty corpus")
    class_names = tuple(sorted({label for _, label in corpus}))
    if len(class_names) < 2:
        raise DegenerateCorpus(f"need at least 2 distinct labels, got {class_names}")
    class_index = {name: i for i, name in enumerate(class_names)}
    X = featurize_many([text for text, _ in corpus], config.dim)
    y = np.array([class_index[label] for _, label in corpus], dtype=np.int64)
    n = X.shape[0]

    rng = np.random.default_rng(config.seed)
    weights = np.zeros((len(class_names), config.dim))
    bias = np.zeros(len(class_names))
    batch = max(1, min(config.batch_size, n))
    loss_history: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(n) if batch < n else np.arange(n)
        for lo in range(0, n, batch):
            idx = order[lo : lo + batch]
            _, grad_w, grad_b = softmax_loss_and_grad(weights, bias, X[idx], y[idx])
            weights -= config.learning_rate * grad_w
            bias -= config.learning_rate * grad_b
        epoch_loss, _, _ = softmax_loss_and_grad(weights, bias, X, y)
        loss_history.append(float(epoch_loss))

    meta = {
        "seed": config.seed,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "batch_size": batch,
        "loss_history": loss_history,
    }
    return TextClassifier(class_names=class_names, dim=config.dim, weights=weights, bias=bias, training_meta=meta)


def relevance_score(question: str, context: str) -> float:
    """Token-overlap F1 between normalized token multisets, in [0, 1].

    Symmetric and invariant to token order; 0 when either side is empty.
    """
    q = Counter(tokenize(question))
    c = Counter(tokenize(context))
    nq = sum(q.values())
    nc = sum(c.values())
    if nq == 0 or nc == 0:
        return 0.0
    overlap = sum(min(count, c[tok]) for tok, count in q.items() if tok in c)
    return 2.0 * overlap / (nq + nc)


# ---------------------------------------------------------------------------
# Artifact I/O: self-describing JSON with sparse weight columns
# ---------------------------------------------------------------------------


def classifier_to_dict(model: TextClassifier) -> dict:
    nonzero_cols = np.flatnonzero(np.any(model.weights != 0.0, axis=0))
    return {
        "kind": "text-classifier",
        "dim": model.dim,
        "class_names": list(model.class_names),
        "bias": [float(v) for v in model.bias],
        "weights": {str(int(c)): [float(v) for v in model.weights[:, c]] for c in nonzero_cols},
        "training_meta": model.training_meta,
    }


def save_text_classifier(model: TextClassifier, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(classifier_to_dict(model), fh, sort_keys=True, indent=None, separators=(",", ":"))
        fh.write("\n")


def classifier_from_dict(obj: dict) -> TextClassifier:
    if obj.get("kind") != "text-classifier":
        raise ValueError("not a text-classifier artifact")
    dim = int(obj["dim"])
    class_names = tuple(obj["class_names"])
    bias = np.array(obj["bias"], dtype=np.float64)
    if bias.shape != (len(class_names),):
        raise ValueError("bias length does not match class_names")
    weights = np.zeros((len(class_names), dim))
    for col_text, column in obj["weights"].items():
        col = int(col_text)
        if not 0 <= col < dim:
            raise ValueError(f"weight column {col} outside declared dimension {dim}")
        if len(column) != len(class_names):
            raise ValueError(f"weight column {col} does not match class count")
        weights[:, col] = column
    return TextClassifier(
        class_names=class_names,
        dim=dim,
        weights=weights,
        bias=bias,
        training_meta=obj.get("training_meta", {}),
    )


def load_text_classifier(path) -> TextClassifier:
    with open(path, encoding="utf-8") as fh:
        return classifier_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Bundled toy corpora (templated questions; see scripts/build_toy_corpora.py)
# ---------------------------------------------------------------------------

_TOY_FILES = {"qtype": "qtype_toy.tsv", "complexity": "complexity_toy.tsv"}


def load_toy_corpus(name: str) -> list[tuple[str, str]]:
    """Load a bundled (text, label) corpus: ``qtype`` or ``complexity``."""
    try:
        filename = _TOY_FILES[name]
    except KeyError:
        raise ValueError(f"unknown toy corpus {name!r}; expected one of {sorted(_TOY_FILES)}") from None
    payload = resources.files("ragate").joinpath("data", filename).read_text(encoding="utf-8")
    corpus: list[tuple[str, str]] = []
    for line in payload.splitlines():
        if not line.strip() or line.startswith("#") or line == "label\ttext":
            continue
        label, text = line.split("\t", 1)
        corpus.append((text, label))
    return corpus
