"""Train/test splitting, confusion matrices and classification reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import EmptyMatrix, LengthMismatch, SchemaMismatch, TooFewRows
from .forest import classify

CLASSES = (0, 1)
U64 = (1 << 64) - 1


def split(ds, train_fraction: float = 0.8, seed: int = 0, stratified: bool = True):
    """Partition a dataset into (train, test).

    Rows are shuffled with ``seed``; the train side gets ``floor(fraction * n)``
    rows, per class when ``stratified``. Both parts keep the original row order.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed & U64)
    labels = [r.label for r in ds.rows]
    groups = [[i for i, l in enumerate(labels) if l == c] for c in CLASSES] if stratified \
        else [list(range(len(labels)))]
    train: List[int] = []
    for group in groups:
        if stratified and not group:
            raise TooFewRows("stratified split needs at least one row per class")
        order = rng.permutation(len(group))
        n_train = math.floor(train_fraction * len(group) + 1e-9)
        train.extend(group[k] for k in order[:n_train])
    train_set = set(train)
    test = [i for i in range(len(labels)) if i not in train_set]
    if not train or not test:
        raise TooFewRows(f"{len(labels)} rows cannot be split {train_fraction}:{1 - train_fraction:.2g}")
    return ds.subset(sorted(train)), ds.subset(test)


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts indexed ``[true][pred]``."""

    counts: Tuple[Tuple[int, int], Tuple[int, int]]

    @classmethod
    def from_rows(cls, rows) -> "ConfusionMatrix":
        (a, b), (c, d) = rows
        return cls(((int(a), int(b)), (int(c), int(d))))

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts))


def confusion(preds: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    if len(preds) != len(labels):
        raise LengthMismatch(f"{len(preds)} predictions for {len(labels)} labels")
    if not preds:
        raise LengthMismatch("need at least one prediction")
    counts = [[0, 0], [0, 0]]
    for p, t in zip(preds, labels):
        counts[int(t)][int(p)] += 1
    return ConfusionMatrix.from_rows(counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassificationReport:
    per_class: Dict[int, ClassMetrics]
    accuracy: float
    macro_avg: ClassMetrics
    weighted_avg: ClassMetrics
    total_support: int


def _ratio(num, den) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def report(cm: ConfusionMatrix) -> ClassificationReport:
    """Per-class precision/recall/F1 plus accuracy and averages.

    Computed in exact rational arithmetic and rounded to float once, so
    identities such as weighted-average recall == accuracy hold exactly.
    Zero denominators give 0.
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has no entries")
    c = cm.counts
    exact = {}
    for k in CLASSES:
        tp = c[k][k]
        predicted = sum(c[t][k] for t in CLASSES)
        support = sum(c[k])
        p = _ratio(tp, predicted)
        r = _ratio(tp, support)
        f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
        exact[k] = (p, r, f1, support)
    macro = [sum(exact[k][m] for k in CLASSES) / len(CLASSES) for m in range(3)]
    weighted = [sum(exact[k][m] * exact[k][3] for k in CLASSES) / total for m in range(3)]
    accuracy = Fraction(sum(c[k][k] for k in CLASSES), total)
    return ClassificationReport(
        per_class={k: ClassMetrics(float(p), float(r), float(f), s) for k, (p, r, f, s) in exact.items()},
        accuracy=float(accuracy),
        macro_avg=ClassMetrics(*map(float, macro), total),
        weighted_avg=ClassMetrics(*map(float, weighted), total),
        total_support=total,
    )


def format_report(r: ClassificationReport) -> str:
    """Render the report as a fixed-width table with 2-decimal cells."""
    head = f"{'':>12} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"
    lines = [head, ""]

    def row(label, m: ClassMetrics):
        return f"{label:>12} {m.precision:>9.2f} {m.recall:>9.2f} {m.f1:>9.2f} {m.support:>9d}"

    for k in CLASSES:
        lines.append(row(str(k), r.per_class[k]))
    lines.append("")
    lines.append(f"{'accuracy':>12} {'':>9} {'':>9} {r.accuracy:>9.2f} {r.total_support:>9d}")
    lines.append(row("macro avg", r.macro_avg))
    lines.append(row("weighted avg", r.weighted_avg))
    return "\n".join(lines) + "\n"


def evaluate(forest, ds, threshold: float = 0.5):
    """Score ``ds`` with ``forest`` and return (confusion matrix, report, scores)."""
    if tuple(ds.feature_names) != tuple(forest.feature_names):
        ds_names = set(ds.feature_names)
        missing = [n for n in forest.feature_names if n not in ds_names]
        if missing:
            raise SchemaMismatch(f"dataset lacks model features: {', '.join(missing)}")
        ds = type(ds)(tuple(forest.feature_names), [r.project(forest.feature_names) for r in ds.rows],
                      list(ds.provenance))
    scores = forest.predict_matrix(ds.matrix()) if len(ds) else np.zeros(0)
    preds = [classify(s, threshold) for s in scores]
    cm = confusion(preds, [r.label for r in ds.rows])
    return cm, report(cm), scores
