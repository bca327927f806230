"""
Validating model annotations offline
====================================

Responses collected from a language model (for example from a batch job)
are checked against the annotation schema, and each quote must occur
verbatim in its report. Invalid responses land in the failure log instead
of the label file.
"""

import json
import tempfile
from pathlib import Path

from fracturelab.corpus_io import load_labels
from fracturelab.model import ReportRecord
from fracturelab.relabel import aggregate_to_csv, build_request, collect

reports = [
    ReportRecord("a", "Lungs are clear. There are chronic rib fractures."),
    ReportRecord("b", "No fracture is visualized."),
    ReportRecord("c", "Stable mid-thoracic compression fracture."),
    ReportRecord("d", "Heart size normal."),
]

print(build_request(reports[0]).user)
print()

responses = [
    ("a", json.dumps({"class": "fracture", "location": ["ribs"], "side": "none", "stage": "healed",
                      "implants": [], "quote": "There are chronic rib fractures."})),
    ("b", json.dumps({"class": "normal", "location": [], "side": "none", "stage": "other",
                      "implants": [], "quote": "No fracture is visualized."})),
    # The quote is paraphrased, so it is rejected.
    ("c", json.dumps({"class": "fracture", "location": ["spine"], "side": "none", "stage": "other",
                      "implants": [], "quote": "thoracic compression fracture, stable"})),
    ("d", '{"class": "other"'),
]

result = collect(reports, responses)
for f in result.failures:
    print(f"failed {f.study_id}: {f.kind}: {f.reason}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "llm_labels.csv"
    aggregate_to_csv(result.corpus, path)
    print(path.read_text(encoding="utf-8"))
    assert load_labels(path) == result.corpus
