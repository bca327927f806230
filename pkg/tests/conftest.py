"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import random
import threading
from pathlib import Path

import pytest

from fracturelab.model import (
    FractureFinding,
    Implant,
    LabeledCorpus,
    Location,
    Prediction,
    PredictionSet,
    Side,
    Stage,
    TriClass,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


def random_finding(rng: random.Random, p_fracture: float = 0.5) -> FractureFinding:
    r = rng.random()
    if r >= p_fracture:
        return FractureFinding(TriClass.NORMAL if rng.random() < 0.5 else TriClass.OTHER)
    return FractureFinding(
        TriClass.FRACTURE,
        locations={loc for loc in Location if rng.random() < 0.3},
        side=rng.choice(list(Side)),
        stage=rng.choice(list(Stage)),
        implants={imp for imp in Implant if rng.random() < 0.2},
    )


def random_instance(rng: random.Random, n: int = 20, scored: bool = True) -> tuple[PredictionSet, LabeledCorpus]:
    ids = [f"s{i:03d}" for i in range(n)]
    gt = LabeledCorpus({sid: random_finding(rng) for sid in ids})
    preds = {}
    for sid in ids:
        # Scores on a coarse grid so ties actually occur.
        score = rng.randrange(11) / 10 if scored else None
        preds[sid] = Prediction(random_finding(rng), score)
    return PredictionSet("random", preds), gt


# -- oracles ------------------------------------------------------------------


def oracle_auc(scores, labels) -> float:
    """O(n^2) pair count: positive above negative is 1, a tie is 1/2."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def oracle_values(task: str, f: FractureFinding) -> set[str]:
    if task == "binary":
        return {"positive" if f.tri_class == TriClass.FRACTURE else "negative"}
    if f.tri_class != TriClass.FRACTURE:
        return set()
    return {
        "location": {x.value for x in f.locations},
        "implants": {x.value for x in f.implants},
        "side": {f.side.value},
        "stage": {f.stage.value},
    }[task]


def oracle_counts(preds: PredictionSet, gt: LabeledCorpus, task: str, value: str) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for sid in gt:
        truth = gt[sid]
        if task != "binary" and truth.tri_class != TriClass.FRACTURE:
            continue
        p = value in oracle_values(task, preds[sid].finding)
        t = value in oracle_values(task, truth)
        tp += p and t
        fp += p and not t
        fn += t and not p
        tn += not p and not t
    return tp, fp, fn, tn


def oracle_prf1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def oracle_balanced(preds: PredictionSet, gt: LabeledCorpus, task: str, values: list[str]) -> float:
    recalls = []
    for v in values:
        tp, fp, fn, tn = oracle_counts(preds, gt, task, v)
        if tp + fn:
            recalls.append(tp / (tp + fn))
    return sum(recalls) / len(recalls) if recalls else 0.0


TASK_VALUES = {
    "binary": ["positive", "negative"],
    "location": [m.value for m in Location],
    "side": [m.value for m in Side],
    "stage": [m.value for m in Stage],
    "implants": [m.value for m in Implant],
}


# -- relabel doubles -------------------------------------------------------------


class ScriptedTransport:
    """Plays back a per-study script of responses or exceptions."""

    def __init__(self, scripts):
        self.scripts = {k: list(v) for k, v in scripts.items()}
        self.calls: dict[str, int] = {}
        self.lock = threading.Lock()

    def __call__(self, request):
        with self.lock:
            self.calls[request.study_id] = self.calls.get(request.study_id, 0) + 1
            step = self.scripts[request.study_id].pop(0)
        if isinstance(step, Exception):
            raise step
        return step


class SleepRecorder:
    def __init__(self):
        self.delays = []
        self.lock = threading.Lock()

    def __call__(self, seconds):
        with self.lock:
            self.delays.append(seconds)
