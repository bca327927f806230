"""
Labeling reports and auditing a legacy label column
===================================================

Eight short reports, each carrying a legacy keyword label. The rule
labeler reads them again, and the audit lists every study where the two
disagree, with the sentence the new label rests on.
"""

from pathlib import Path

from fracturelab import extract_attributes, label_corpus
from fracturelab.aggregate import audit
from fracturelab.corpus_io import load_legacy, load_reports

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

reports = load_reports(DATA / "table1_reports.csv")
legacy = load_legacy(DATA / "table1_legacy.csv")

# One finding per report: tri-class label, attributes and the evidence sentence.
for r in reports[:4]:
    f = extract_attributes(r.text)
    print(f"{r.study_id}  {f.tri_class.value:<8} side={f.side.value:<5} stage={f.stage.value:<6} "
          f"locations={sorted(x.value for x in f.locations)}")

relabeled = label_corpus(reports)
result = audit(legacy, relabeled)
print()
print("audit summary:", result.summary())
for d in result.discrepancies:
    print(f"  {d.study_id}: legacy={d.legacy} relabeled={d.relabeled.value:<8} quote={d.quote!r}")

# Blank legacy cells count as negative, so a blank next to a described
# fracture shows up here as a missed positive.
