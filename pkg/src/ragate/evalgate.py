"""Evaluation harness: gate decisions, QA metrics, cost ledger, analyses.

Quality is In-Accuracy (the chosen answer contains a gold answer after
normalization); efficiency is an accounting ledger (LM calls, retrieval
calls, PFLOPs per question), never a profiled measurement.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import GateDecision, QuestionRecord, RunReport, answer_is_correct
from .features import FeatureVector, SchemaMismatch
from .tabular.base import TabularDataset
from .tabular.protocol import GateModel

__all__ = [
    "LengthMismatch",
    "MethodCost",
    "CostModel",
    "LabeledOutcome",
    "label_need_retrieval",
    "decide",
    "evaluate_method",
    "ideal_decisions",
    "standard_reports",
    "flops_upper_bound",
    "permutation_importance",
    "in_accuracy_metric",
    "accuracy_metric",
    "correlation_matrix",
    "render_report",
]

DEFAULT_THRESHOLD = 0.5


class LengthMismatch(Exception):
    """Decisions and records disagree in length."""


@dataclass(frozen=True)
class MethodCost:
    """Per-question cost constants for one method (an accounting entry)."""

    llm_generate_calls_per_question: float = 1.0
    ue_llm_calls_per_question: float = 0.0
    pflops_per_llm_call: float = 0.0181
    pflops_feature_pipeline: float = 0.0

    def __post_init__(self):
        for name in (
            "llm_generate_calls_per_question",
            "ue_llm_calls_per_question",
            "pflops_per_llm_call",
            "pflops_feature_pipeline",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def lm_calls(self) -> float:
        return self.llm_generate_calls_per_question + self.ue_llm_calls_per_question

    @property
    def mean_pflops(self) -> float:
        return self.pflops_per_llm_call * self.lm_calls + self.pflops_feature_pipeline


@dataclass(frozen=True)
class CostModel:
    """Named per-method cost entries with a shared fallback."""

    default: MethodCost = MethodCost()
    methods: dict = field(default_factory=dict)

    def cost_for(self, method_name: str) -> MethodCost:
        return self.methods.get(method_name, self.default)

    @classmethod
    def from_config(cls, obj: dict | None) -> "CostModel":
        if not obj:
            return cls()
        default = MethodCost(**obj.get("default", {}))
        methods = {name: MethodCost(**entry) for name, entry in obj.get("methods", {}).items()}
        return cls(default=default, methods=methods)


@dataclass(frozen=True)
class LabeledOutcome:
    correct_without: bool
    correct_with: bool

    @classmethod
    def from_record(cls, record: QuestionRecord) -> "LabeledOutcome":
        return cls(
            correct_without=answer_is_correct(record.answer_without_retrieval, record.gold_answers),
            correct_with=answer_is_correct(record.answer_with_retrieval, record.gold_answers),
        )


def label_need_retrieval(record: QuestionRecord) -> int:
    """1 iff retrieval flips a wrong answer to a right one; else 0."""
    outcome = LabeledOutcome.from_record(record)
    return int(outcome.correct_with and not outcome.correct_without)


def ideal_decisions(records) -> list[bool]:
    """The oracle gate: retrieve exactly where it helps."""
    return [bool(label_need_retrieval(r)) for r in records]


def decide(model: GateModel, vector: FeatureVector, threshold: float = DEFAULT_THRESHOLD) -> GateDecision:
    """Score one question with the gate; retrieve when score >= threshold."""
    if tuple(model.feature_names) != vector.schema.names:
        raise SchemaMismatch(
            f"model was trained on {list(model.feature_names)[:4]}... but the vector carries {list(vector.schema.names)[:4]}..."
        )
    score = float(model.predict_proba(vector.values[None, :])[0])
    return GateDecision(retrieve=bool(score >= threshold), score=score)


def evaluate_method(method_name: str, decisions, records, cost: MethodCost = MethodCost()) -> RunReport:
    """Score a decision vector over records and attach its cost ledger."""
    if len(decisions) != len(records):
        raise LengthMismatch(f"{len(decisions)} decisions for {len(records)} records")
    if not len(records):
        raise ValueError("cannot evaluate an empty record list")
    hits = 0
    retrievals = 0
    for decision, record in zip(decisions, records):
        chosen = record.answer_with_retrieval if decision else record.answer_without_retrieval
        hits += answer_is_correct(chosen, record.gold_answers)
        retrievals += bool(decision)
    n = len(records)
    return RunReport(
        method_name=method_name,
        in_accuracy=hits / n,
        lm_calls=cost.lm_calls,
        retrieval_calls=retrievals / n,
        mean_pflops=cost.mean_pflops,
    )


def standard_reports(records, cost_model: CostModel = CostModel()) -> list[RunReport]:
    """The three reference rows every evaluation carries: Never/Always/Ideal."""
    n = len(records)
    return [
        evaluate_method("never_rag", [False] * n, records, cost_model.cost_for("never_rag")),
        evaluate_method("always_rag", [True] * n, records, cost_model.cost_for("always_rag")),
        evaluate_method("ideal", ideal_decisions(records), records, cost_model.cost_for("ideal")),
    ]


def flops_upper_bound(tflops_per_gpu: float, num_gpus: int, elapsed_seconds: float) -> float:
    """Hardware-roofline FLOPs at 100% utilization: TFLOPs·1e12·GPUs·seconds."""
    if tflops_per_gpu < 0 or num_gpus < 0 or elapsed_seconds < 0:
        raise ValueError("flops_upper_bound inputs must be >= 0")
    return tflops_per_gpu * 1e12 * num_gpus * elapsed_seconds


def accuracy_metric(y):
    """Plain classification accuracy at threshold 0.5 against labels ``y``."""
    y = np.asarray(y)

    def metric(model, X) -> float:
        return float(np.mean((model.predict_proba(X) >= 0.5) == (y == 1)))

    return metric


def in_accuracy_metric(correct_without, correct_with, threshold: float = DEFAULT_THRESHOLD):
    """Downstream In-Accuracy of the answers a model's decisions select."""
    cwo = np.asarray(correct_without, dtype=bool)
    cw = np.asarray(correct_with, dtype=bool)

    def metric(model, X) -> float:
        decisions = model.predict_proba(X) >= threshold
        return float(np.mean(np.where(decisions, cw, cwo)))

    return metric


def permutation_importance(model, data: TabularDataset, metric, repeats: int = 20, seed: int = 0) -> np.ndarray:
    """Mean metric drop when one column is shuffled, per feature (seeded).

    ``metric(model, X) -> float`` is evaluated once on the intact matrix and
    ``repeats`` times per feature with that column permuted.
    """
    names = getattr(model, "feature_names", None)
    if names is not None and tuple(names) != tuple(data.feature_names):
        raise SchemaMismatch("model feature names do not match the data")
    if repeats < 0:
        raise ValueError("repeats must be >= 0")
    rng = np.random.default_rng(seed)
    n, d = data.X.shape
    baseline = float(metric(model, data.X))
    scores = np.zeros(d)
    for j in range(d):
        drop = 0.0
        for _ in range(repeats):
            shuffled = data.X.copy()
            shuffled[:, j] = shuffled[rng.permutation(n), j]
            drop += baseline - float(metric(model, shuffled))
        scores[j] = drop / repeats if repeats else 0.0
    return scores


def correlation_matrix(X, y) -> np.ndarray:
    """Absolute Pearson correlations of [features | label], in [0, 1].

    Zero-variance columns correlate 0 with everything, their own diagonal
    entry included.
    """
    M = np.column_stack([np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64)])
    if not np.all(np.isfinite(M)):
        raise ValueError("correlation inputs must be finite")
    k = M.shape[1]
    centered = M - M.mean(axis=0)
    cov = centered.T @ centered / M.shape[0]
    std = M.std(axis=0)
    out = np.zeros((k, k))
    live = std > 0.0
    denom = np.outer(std, std)
    mask = np.outer(live, live)
    out[mask] = np.abs(cov[mask] / denom[mask])
    out = np.minimum(out, 1.0)
    out[np.diag_indices(k)] = np.where(live, 1.0, 0.0)
    return out


_REPORT_COLUMNS = ("method", "in_accuracy", "lm_calls", "retrieval_calls", "mean_pflops")


def render_report(reports, fmt: str = "markdown") -> str:
    """Render RunReports as a Table-1-style summary (markdown or csv).

    Markdown shows InAcc as a percent with 1 decimal; csv keeps full float
    precision so values round-trip exactly.
    """
    if fmt == "markdown":
        lines = [
            "| Method | InAcc (%) | LMC | RC | PFLOPs/question |",
            "| --- | --- | --- | --- | --- |",
        ]
        for r in reports:
            lines.append(
                f"| {r.method_name} | {r.in_accuracy * 100:.1f} | {r.lm_calls:.2f} "
                f"| {r.retrieval_calls:.2f} | {r.mean_pflops:.8g} |"
            )
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_REPORT_COLUMNS)
        for r in reports:
            writer.writerow(
                [r.method_name, repr(r.in_accuracy), repr(r.lm_calls), repr(r.retrieval_calls), repr(r.mean_pflops)]
            )
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}; expected markdown or csv")
