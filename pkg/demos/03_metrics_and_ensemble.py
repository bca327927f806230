"""
Metrics and union ensembling
============================

Five simulated classifiers see the same 400 studies. Each one is a noisy
score thresholded at 0.5. Declaring a fracture when any member does trades
precision for recall, and the metrics module makes the trade visible.
"""

import numpy as np

from fracturelab.aggregate import ensemble_union
from fracturelab.metrics import evaluate, format_reports, prediction_auc
from fracturelab.model import FractureFinding, LabeledCorpus, Prediction, PredictionSet, TriClass

rng = np.random.default_rng(0)
n = 400
truth = rng.random(n) < 0.25
gt = LabeledCorpus({
    f"s{i:04d}": FractureFinding(TriClass.FRACTURE if y else TriClass.NORMAL) for i, y in enumerate(truth)
})


def member(seed):
    r = np.random.default_rng(seed)
    # Positives score higher on average, but the threshold misses many of them.
    scores = np.clip(0.35 + 0.2 * truth + r.normal(0, 0.15, n), 0, 1)
    return PredictionSet(f"seed{seed}", {
        sid: Prediction(FractureFinding(TriClass.FRACTURE if s >= 0.5 else TriClass.NORMAL), float(s))
        for sid, s in zip(gt, scores)
    })


members = [member(s) for s in range(5)]
union = ensemble_union(members)

print("member   precision  recall  auc")
for m in members:
    binary = evaluate(m, gt)[0]
    pos = binary.per_class["positive"]
    print(f"{m.model_name:<8} {pos.precision:9.3f}  {pos.recall:6.3f}  {prediction_auc(m, gt):.3f}")

# The union keeps labels only, so it has no ROC-AUC of its own.
print()
print(format_reports(evaluate(union, gt)[:1]), end="")
