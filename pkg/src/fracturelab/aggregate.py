"""Union ensembling of prediction sets and legacy-vs-relabeled audits."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import MemberKeyMismatch
from .metrics import binarize
from .model import FractureFinding, LabeledCorpus, Prediction, PredictionSet, Side, Stage, TriClass

logger = logging.getLogger(__name__)

LEGACY_POSITIVE = 1.0


def _vote(values, tie):
    counts = Counter(values).most_common()
    if not counts:
        return None
    if len(counts) > 1 and counts[0][1] == counts[1][1]:
        return tie
    return counts[0][0]


def _merge(findings: Sequence[FractureFinding]) -> FractureFinding:
    positives = [f for f in findings if f.is_fracture]
    if not positives:
        if any(f.tri_class is TriClass.NORMAL for f in findings):
            return FractureFinding(TriClass.NORMAL)
        return FractureFinding(TriClass.OTHER)
    return FractureFinding(
        TriClass.FRACTURE,
        locations=frozenset().union(*(f.locations for f in positives)),
        side=_vote([f.side for f in positives], Side.BOTH),
        stage=_vote([f.stage for f in positives], Stage.OTHER),
        implants=frozenset().union(*(f.implants for f in positives)),
    )


def ensemble_union(members: Sequence[PredictionSet]) -> PredictionSet:
    """A study is a fracture if any member calls it one.

    Non-fracture studies become normal if any member says normal, else
    other. Attributes of positive studies take the union of member
    location/implant sets and a majority vote over side and stage (ties
    go to ``Side.BOTH`` / ``Stage.OTHER``). Scores are dropped.
    """
    if not members:
        raise ValueError("ensemble_union needs at least one member")
    keys = set(members[0].entries)
    for m in members[1:]:
        if set(m.entries) != keys:
            diff = sorted(keys.symmetric_difference(m.entries))
            raise MemberKeyMismatch(f"member {m.model_name!r} covers a different study set, e.g. {diff[:3]}")
    entries = {
        sid: Prediction(_merge([m.entries[sid].finding for m in members]))
        for sid in sorted(keys)
    }
    return PredictionSet(f"union(n={len(members)})", entries)


def positive_ids(preds: PredictionSet) -> set[str]:
    return {sid for sid, p in preds.entries.items() if binarize(p.label)}


@dataclass(frozen=True)
class Discrepancy:
    study_id: str
    legacy: float | None
    relabeled: TriClass
    quote: str


@dataclass(frozen=True)
class AuditResult:
    discrepancies: list[Discrepancy]
    legacy_positive: int
    relabeled_fracture: int
    skipped: int

    @property
    def disagreements(self) -> int:
        return len(self.discrepancies)

    def summary(self) -> dict[str, int]:
        return {
            "legacy_positive": self.legacy_positive,
            "relabeled_fracture": self.relabeled_fracture,
            "disagreements": self.disagreements,
            "skipped": self.skipped,
        }


def legacy_positive(value: float | None) -> bool:
    # Uncertain (-1), negative (0) and absent labels all count as negative.
    return value is not None and value == LEGACY_POSITIVE


def audit(legacy: Mapping[str, float | None], relabeled: LabeledCorpus) -> AuditResult:
    """Compare legacy fracture labels against a relabeled corpus.

    Studies present in only one source are skipped and counted.
    """
    joined = sorted(set(legacy) & set(relabeled.entries))
    skipped = len(set(legacy) ^ set(relabeled.entries))
    if skipped:
        logger.warning("audit: %d studies present in only one source were skipped", skipped)
    rows = []
    n_legacy = n_relabeled = 0
    for sid in joined:
        old = legacy_positive(legacy[sid])
        finding = relabeled.entries[sid]
        new = binarize(finding.tri_class)
        n_legacy += old
        n_relabeled += new
        if old != new:
            rows.append(Discrepancy(sid, legacy[sid], finding.tri_class, finding.evidence))
    return AuditResult(rows, n_legacy, n_relabeled, skipped)


def to_legacy(corpus: LabeledCorpus) -> dict[str, float | None]:
    """Express a corpus as a legacy table: fracture 1.0, normal 0.0, other absent."""
    table = {TriClass.FRACTURE: 1.0, TriClass.NORMAL: 0.0, TriClass.OTHER: None}
    return {sid: table[f.tri_class] for sid, f in corpus.entries.items()}
