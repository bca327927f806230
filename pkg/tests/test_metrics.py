import json
import random

import pytest
from hypothesis import given, strategies as st

from conftest import TASK_VALUES, oracle_auc, oracle_balanced, oracle_counts, oracle_prf1, random_instance
from fracturelab.errors import EmptyEvaluation, MissingPrediction, MissingScore, UndefinedAUC
from fracturelab.metrics import (
    ConfusionCounts,
    Task,
    balanced_accuracy,
    binarize,
    confusion,
    evaluate,
    f1_from_pr,
    format_reports,
    prediction_auc,
    prf1,
    reports_to_json,
    roc_auc,
    task_report,
)
from fracturelab.model import FractureFinding, LabeledCorpus, Location, Prediction, PredictionSet, Side, TriClass

F, N, O = TriClass.FRACTURE, TriClass.NORMAL, TriClass.OTHER


def _binary(pairs, scores=None):
    gt = LabeledCorpus({sid: FractureFinding(t) for sid, (_, t) in pairs.items()})
    preds = PredictionSet.from_labels("m", {sid: p for sid, (p, _) in pairs.items()}, scores)
    return preds, gt


def test_binarize():
    assert binarize(F) and not binarize(N) and not binarize(O)


def test_confusion_worked_example():
    preds, gt = _binary({"a": (F, F), "b": (F, N), "c": (N, F), "d": (O, O), "e": (N, F)})
    c = confusion(preds, gt, F)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 2, 1)
    assert c.total == 5 and c.support == 3
    assert confusion(preds, gt, True) == c
    p, r, f = prf1(c)
    assert (p, r) == (0.5, 1 / 3)
    assert f == pytest.approx(0.4)


def test_zero_division_is_zero():
    assert prf1(ConfusionCounts(0, 0, 0, 5)) == (0.0, 0.0, 0.0)
    assert f1_from_pr(0.0, 0.0) == 0.0


@pytest.mark.parametrize("p,r,expected", [(0.777, 0.045, 0.085), (0.791, 0.246, 0.376), (0.682, 0.584, 0.629)])
def test_f1_from_reported_precision_recall(p, r, expected):
    # 0.001 is the pinned tolerance; 1e-9 absorbs float noise in the subtraction.
    assert abs(round(f1_from_pr(p, r), 3) - expected) <= 0.001 + 1e-9


def test_attribute_tasks_condition_on_gt_fractures():
    gt = LabeledCorpus({
        "a": FractureFinding(F, {Location.RIBS}, Side.LEFT),
        "b": FractureFinding(N),
    })
    preds = PredictionSet("m", {
        "a": Prediction(FractureFinding(F, {Location.RIBS, Location.CLAVICLE}, Side.RIGHT)),
        "b": Prediction(FractureFinding(F, {Location.RIBS}, Side.LEFT)),
    })
    assert confusion(preds, gt, Location.RIBS) == ConfusionCounts(1, 0, 0, 0)
    assert confusion(preds, gt, Location.CLAVICLE) == ConfusionCounts(0, 1, 0, 0)
    assert confusion(preds, gt, Side.LEFT) == ConfusionCounts(0, 0, 1, 0)
    assert balanced_accuracy(preds, gt, Task.SIDE) == 0.0
    rep = task_report(preds, gt, Task.LOCATION)
    assert rep.n_studies == 1 and rep.accuracy == 0.0


def test_balanced_accuracy_worked_example():
    preds, gt = _binary({"a": (F, F), "b": (N, F), "c": (N, N), "d": (N, N), "e": (N, N), "f": (F, N)})
    # recall(positive) = 1/2, recall(negative) = 3/4
    assert balanced_accuracy(preds, gt) == pytest.approx(0.625)


def test_missing_prediction():
    gt = LabeledCorpus({"a": FractureFinding(F)})
    with pytest.raises(MissingPrediction):
        confusion(PredictionSet("m", {}), gt, F)


def test_empty_evaluation():
    gt = LabeledCorpus({"a": FractureFinding(N)})
    preds = PredictionSet.from_labels("m", {"a": N})
    with pytest.raises(EmptyEvaluation):
        balanced_accuracy(preds, gt, Task.SIDE)
    with pytest.raises(EmptyEvaluation):
        evaluate(preds, LabeledCorpus({}))
    assert [r.task for r in evaluate(preds, gt)] == [Task.BINARY]


def test_auc_examples():
    assert roc_auc([0.9, 0.8, 0.1], [True, True, False]) == 1.0
    assert roc_auc([0.1, 0.9], [True, False]) == 0.0
    assert roc_auc([0.5, 0.5, 0.5, 0.5], [True, False, True, False]) == 0.5
    assert roc_auc([0.2, 0.6, 0.6, 0.9], [False, True, False, True]) == pytest.approx(0.875)


def test_auc_undefined():
    with pytest.raises(UndefinedAUC):
        roc_auc([0.1, 0.2], [True, True])


def test_prediction_auc_requires_scores():
    preds, gt = _binary({"a": (F, F), "b": (N, N)}, {"a": 0.9})
    with pytest.raises(MissingScore):
        prediction_auc(preds, gt)


@given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=2, max_size=30))
def test_auc_matches_pair_oracle(rows):
    scores = [s / 5 for s, _ in rows]
    labels = [y for _, y in rows]
    if all(labels) or not any(labels):
        return
    assert abs(roc_auc(scores, labels) - oracle_auc(scores, labels)) <= 1e-12


@given(st.lists(st.tuples(st.integers(0, 1000), st.booleans()), min_size=2, max_size=30))
def test_auc_invariant_under_monotone_transform(rows):
    scores = [s / 1000 for s, _ in rows]
    labels = [y for _, y in rows]
    if all(labels) or not any(labels):
        return
    assert roc_auc(scores, labels) == pytest.approx(roc_auc([s ** 3 for s in scores], labels), abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_metrics_match_oracle(seed):
    preds, gt = random_instance(random.Random(seed))
    for task in Task:
        values = TASK_VALUES[task.value]
        if task is not Task.BINARY and not any(f.is_fracture for f in gt.entries.values()):
            continue
        rep = task_report(preds, gt, task)
        for v in values:
            tp, fp, fn, tn = oracle_counts(preds, gt, task.value, v)
            m = rep.per_class[v]
            assert (m.counts.tp, m.counts.fp, m.counts.fn, m.counts.tn) == (tp, fp, fn, tn)
            assert (m.precision, m.recall, m.f1) == oracle_prf1(tp, fp, fn)
        assert rep.balanced_accuracy == oracle_balanced(preds, gt, task.value, values)


def test_report_serialization():
    preds, gt = random_instance(random.Random(0))
    reports = evaluate(preds, gt)
    doc = json.loads(reports_to_json(reports, "m"))
    assert doc["model"] == "m"
    assert [t["task"] for t in doc["tasks"]] == ["binary", "location", "side", "stage", "implants"]
    assert list(doc["tasks"][0]) == ["task", "n_studies", "accuracy", "balanced_accuracy", "roc_auc", "per_class"]
    assert doc["tasks"][0]["roc_auc"] is not None
    assert "[binary]" in format_reports(reports)


def test_auc_absent_without_scores():
    preds, gt = random_instance(random.Random(1), scored=False)
    assert evaluate(preds, gt)[0].roc_auc is None


def test_self_evaluation_is_perfect():
    _, gt = random_instance(random.Random(5), n=40)
    for rep in evaluate(PredictionSet.from_corpus(gt), gt):
        assert rep.accuracy == 1.0 and rep.balanced_accuracy == 1.0 and rep.roc_auc is None
        for m in rep.per_class.values():
            # Classes without support keep the 0/0 -> 0 convention.
            assert m.f1 == (1.0 if m.support else 0.0)
