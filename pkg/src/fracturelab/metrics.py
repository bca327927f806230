"""Classification metrics over predicted vs ground-truth findings.

The binary task compares fracture against everything else over all
studies. The four attribute tasks are scored one-vs-rest per class value,
restricted to studies whose ground truth is a fracture. Ratios with a zero
denominator are reported as 0 rather than NaN so reports stay serializable;
``support`` exposes when that happened.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyEvaluation, MissingPrediction, MissingScore, UndefinedAUC
from .model import FractureFinding, Implant, LabeledCorpus, Location, PredictionSet, Side, Stage, TriClass

logger = logging.getLogger(__name__)

POSITIVE = "positive"
NEGATIVE = "negative"


class Task(enum.Enum):
    BINARY = "binary"
    LOCATION = "location"
    SIDE = "side"
    STAGE = "stage"
    IMPLANTS = "implants"


def binarize(label: TriClass) -> bool:
    """True for fracture; normal and other both count as negative."""
    return label is TriClass.FRACTURE


def _classes(task: Task) -> list[str]:
    return {
        Task.BINARY: [POSITIVE, NEGATIVE],
        Task.LOCATION: [m.value for m in Location],
        Task.SIDE: [m.value for m in Side],
        Task.STAGE: [m.value for m in Stage],
        Task.IMPLANTS: [m.value for m in Implant],
    }[task]


def _values(task: Task, finding: FractureFinding) -> frozenset[str]:
    """The class values a finding carries for ``task``."""
    if task is Task.BINARY:
        return frozenset({POSITIVE if binarize(finding.tri_class) else NEGATIVE})
    if not finding.is_fracture:
        return frozenset()
    if task is Task.LOCATION:
        return frozenset(m.value for m in finding.locations)
    if task is Task.IMPLANTS:
        return frozenset(m.value for m in finding.implants)
    if task is Task.SIDE:
        return frozenset({finding.side.value})
    return frozenset({finding.stage.value})


def _class_value(cls: Hashable) -> str:
    if isinstance(cls, enum.Enum):
        return cls.value
    if isinstance(cls, bool):
        return POSITIVE if cls else NEGATIVE
    return str(cls)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def support(self) -> int:
        return self.tp + self.fn


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall, 0 when both are 0."""
    return _ratio(2 * precision * recall, precision + recall)


def prf1(c: ConfusionCounts) -> tuple[float, float, float]:
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    return precision, recall, f1_from_pr(precision, recall)


def _pairs(preds: PredictionSet, gt: LabeledCorpus, task: Task) -> list[tuple[FractureFinding, FractureFinding]]:
    """(predicted, true) finding pairs for the studies ``task`` is scored on."""
    pairs = []
    for sid, truth in gt.entries.items():
        if sid not in preds.entries:
            raise MissingPrediction(sid)
        if task is not Task.BINARY and not truth.is_fracture:
            continue
        pairs.append((preds.entries[sid].finding, truth))
    return pairs


def _count(pairs, task: Task, value: str) -> ConfusionCounts:
    tp = fp = fn = tn = 0
    for pred, truth in pairs:
        p = value in _values(task, pred)
        t = value in _values(task, truth)
        if p and t:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def confusion(preds: PredictionSet, gt: LabeledCorpus, cls: Hashable, task: Task | None = None) -> ConfusionCounts:
    """One-vs-rest counts for ``cls``.

    ``cls`` is a class value for ``task``: a ``TriClass`` or bool for the
    binary task (``TriClass.FRACTURE``/``True`` is the positive class), or a
    ``Location``/``Side``/``Stage``/``Implant`` member, whose task is
    inferred when not given.
    """
    if task is None:
        task = _infer_task(cls)
    if task is Task.BINARY and isinstance(cls, TriClass):
        cls = binarize(cls)
    return _count(_pairs(preds, gt, task), task, _class_value(cls))


def _infer_task(cls: Hashable) -> Task:
    for kind, task in ((Location, Task.LOCATION), (Side, Task.SIDE), (Stage, Task.STAGE),
                       (Implant, Task.IMPLANTS), (TriClass, Task.BINARY), (bool, Task.BINARY)):
        if isinstance(cls, kind):
            return task
    raise ValueError(f"cannot infer task for class {cls!r}")


def _balanced(per_class: dict[str, ConfusionCounts]) -> float:
    recalls = [prf1(c)[1] for c in per_class.values() if c.support > 0]
    if not recalls:
        return 0.0
    return sum(recalls) / len(recalls)


def balanced_accuracy(preds: PredictionSet, gt: LabeledCorpus, task: Task = Task.BINARY) -> float:
    """Unweighted mean of per-class recall over classes with support."""
    pairs = _pairs(preds, gt, task)
    if not pairs:
        raise EmptyEvaluation(f"no studies to evaluate for task {task.value}")
    return _balanced({v: _count(pairs, task, v) for v in _classes(task)})


def roc_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Mann-Whitney AUC with midranks, so tied pairs count one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC(f"need both classes, got {n_pos} positive and {n_neg} negative")
    ranks = rankdata(s)
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def prediction_auc(preds: PredictionSet, gt: LabeledCorpus) -> float:
    """Binary fracture AUC from prediction scores over the ground-truth studies."""
    scores, labels = [], []
    for sid, truth in gt.entries.items():
        if sid not in preds.entries:
            raise MissingPrediction(sid)
        score = preds.entries[sid].score
        if score is None:
            raise MissingScore(f"prediction for {sid!r} has no score")
        scores.append(score)
        labels.append(binarize(truth.tri_class))
    return roc_auc(scores, labels)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    counts: ConfusionCounts = field(default_factory=ConfusionCounts, compare=True)


@dataclass(frozen=True)
class MetricsReport:
    task: Task
    per_class: dict[str, ClassMetrics]
    accuracy: float
    balanced_accuracy: float
    n_studies: int
    roc_auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "n_studies": self.n_studies,
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "roc_auc": self.roc_auc,
            "per_class": {
                name: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "tp": m.counts.tp,
                    "fp": m.counts.fp,
                    "fn": m.counts.fn,
                    "tn": m.counts.tn,
                }
                for name, m in self.per_class.items()
            },
        }


def task_report(preds: PredictionSet, gt: LabeledCorpus, task: Task) -> MetricsReport:
    pairs = _pairs(preds, gt, task)
    if not pairs:
        raise EmptyEvaluation(f"no studies to evaluate for task {task.value}")
    counts = {v: _count(pairs, task, v) for v in _classes(task)}
    per_class = {}
    for value, c in counts.items():
        p, r, f = prf1(c)
        per_class[value] = ClassMetrics(p, r, f, c.support, c)
    correct = sum(_values(task, pred) == _values(task, truth) for pred, truth in pairs)
    auc = None
    if task is Task.BINARY:
        auc = _optional_auc(preds, gt)
    return MetricsReport(task, per_class, correct / len(pairs), _balanced(counts), len(pairs), auc)


def _optional_auc(preds: PredictionSet, gt: LabeledCorpus) -> float | None:
    scored = [preds.entries[sid].score is not None for sid in gt.entries]
    if not any(scored):
        return None
    try:
        return prediction_auc(preds, gt)
    except UndefinedAUC as exc:
        logger.warning("ROC-AUC undefined: %s", exc)
        return None


def evaluate(preds: PredictionSet, gt: LabeledCorpus) -> list[MetricsReport]:
    """Binary report plus one report per attribute task.

    Attribute tasks are skipped (with a log message) when the ground truth
    has no fracture studies to score them on.
    """
    if not gt.entries:
        raise EmptyEvaluation("ground truth is empty")
    reports = [task_report(preds, gt, Task.BINARY)]
    for task in (Task.LOCATION, Task.SIDE, Task.STAGE, Task.IMPLANTS):
        try:
            reports.append(task_report(preds, gt, task))
        except EmptyEvaluation:
            logger.info("skipping %s task: no ground-truth fractures", task.value)
    return reports


def reports_to_json(reports: Sequence[MetricsReport], model_name: str | None = None) -> str:
    doc = {"model": model_name, "tasks": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=2) + "\n"


def format_reports(reports: Sequence[MetricsReport], digits: int = 3) -> str:
    """Plain-text table, rounded for display only."""
    fmt: Callable[[float | None], str] = lambda x: "-" if x is None else f"{x:.{digits}f}"
    lines = []
    for r in reports:
        lines.append(f"[{r.task.value}] n={r.n_studies} accuracy={fmt(r.accuracy)} "
                     f"balanced_accuracy={fmt(r.balanced_accuracy)} roc_auc={fmt(r.roc_auc)}")
        for name, m in r.per_class.items():
            lines.append(f"  {name:<14} P={fmt(m.precision)} R={fmt(m.recall)} F1={fmt(m.f1)} support={m.support}")
    return "\n".join(lines) + "\n"
