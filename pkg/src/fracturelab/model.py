"""Domain types shared by every module: label enums, findings, corpora.

All enum values carry their canonical lowercase serialization as the
enum value, so ``Location("sternal wires") is Location.STERNAL_WIRES``.
Set-valued fields serialize in enum declaration order, joined by ``;``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import InvalidFinding, UnknownToken

SET_SEPARATOR = ";"

#: Column order of the flat record schema used for label and prediction files.
FLAT_FIELDS = ("study_id", "tri_class", "locations", "side", "stage", "implants", "evidence")


class TriClass(enum.Enum):
    FRACTURE = "fracture"
    NORMAL = "normal"
    OTHER = "other"


class Location(enum.Enum):
    RIBS = "ribs"
    CLAVICLE = "clavicle"
    SHOULDER = "shoulder"
    SPINE = "spine"
    STERNUM = "sternum"
    SCAPULA = "scapula"
    STERNAL_WIRES = "sternal wires"
    OTHER = "other"


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    BOTH = "both"
    NONE = "none"


class Stage(enum.Enum):
    ACUTE = "acute"
    HEALED = "healed"
    OTHER = "other"


class Implant(enum.Enum):
    SCREWS = "screws"
    RODS = "rods"
    PLATES = "plates"
    OTHER = "other"


class Provenance(enum.Enum):
    RULE_PARSER = "rule-parser"
    LLM = "llm"
    LEGACY = "legacy"


ENUM_KINDS: dict[str, type[enum.Enum]] = {
    "tri_class": TriClass,
    "location": Location,
    "side": Side,
    "stage": Stage,
    "implant": Implant,
    "provenance": Provenance,
}


def parse_enum(kind: type[enum.Enum] | str, token: str) -> enum.Enum:
    """Parse ``token`` into a member of ``kind`` by its canonical form.

    Matching is case-insensitive and ignores surrounding whitespace; anything
    that is not a canonical form raises :class:`UnknownToken`.
    """
    if isinstance(kind, str):
        try:
            kind = ENUM_KINDS[kind]
        except KeyError:
            raise ValueError(f"unknown enum kind {kind!r}") from None
    normalized = " ".join(str(token).split()).casefold()
    try:
        return kind(normalized)
    except ValueError:
        raise UnknownToken(kind.__name__, token) from None


def _ordered(values: Iterable[enum.Enum], kind: type[enum.Enum]) -> list[enum.Enum]:
    present = set(values)
    return [member for member in kind if member in present]


def format_set(values: Iterable[enum.Enum], kind: type[enum.Enum]) -> str:
    return SET_SEPARATOR.join(m.value for m in _ordered(values, kind))


def parse_set(kind: type[enum.Enum], text: str) -> frozenset:
    if not text.strip():
        return frozenset()
    return frozenset(parse_enum(kind, part) for part in text.split(SET_SEPARATOR))


@dataclass(frozen=True)
class FractureFinding:
    """One structured finding for a report.

    Non-fracture findings must carry empty attribute sets, ``Side.NONE`` and
    ``Stage.OTHER``; this is checked at construction.
    """

    tri_class: TriClass
    locations: frozenset[Location] = frozenset()
    side: Side = Side.NONE
    stage: Stage = Stage.OTHER
    implants: frozenset[Implant] = frozenset()
    evidence: str = ""

    def __post_init__(self):
        object.__setattr__(self, "locations", frozenset(self.locations))
        object.__setattr__(self, "implants", frozenset(self.implants))
        if not isinstance(self.tri_class, TriClass):
            raise InvalidFinding(f"tri_class must be a TriClass, got {self.tri_class!r}")
        if not all(isinstance(x, Location) for x in self.locations):
            raise InvalidFinding(f"bad locations {self.locations!r}")
        if not all(isinstance(x, Implant) for x in self.implants):
            raise InvalidFinding(f"bad implants {self.implants!r}")
        if not isinstance(self.side, Side) or not isinstance(self.stage, Stage):
            raise InvalidFinding("side and stage must be Side and Stage members")
        if self.tri_class is not TriClass.FRACTURE and (
            self.locations or self.implants or self.side is not Side.NONE or self.stage is not Stage.OTHER
        ):
            raise InvalidFinding(f"{self.tri_class.value} finding cannot carry fracture attributes")

    @property
    def is_fracture(self) -> bool:
        return self.tri_class is TriClass.FRACTURE

    def without_evidence(self) -> FractureFinding:
        return FractureFinding(self.tri_class, self.locations, self.side, self.stage, self.implants)

    def check_evidence(self, source: str) -> None:
        if self.evidence and self.evidence not in source:
            raise InvalidFinding("evidence is not a substring of the source text")


def serialize_finding(finding: FractureFinding) -> dict[str, str]:
    """Flatten a finding into string fields (without the study id)."""
    return {
        "tri_class": finding.tri_class.value,
        "locations": format_set(finding.locations, Location),
        "side": finding.side.value,
        "stage": finding.stage.value,
        "implants": format_set(finding.implants, Implant),
        "evidence": finding.evidence,
    }


def deserialize_finding(record: Mapping[str, str]) -> FractureFinding:
    return FractureFinding(
        tri_class=parse_enum(TriClass, record["tri_class"]),
        locations=parse_set(Location, record.get("locations", "")),
        side=parse_enum(Side, record.get("side") or "none"),
        stage=parse_enum(Stage, record.get("stage") or "other"),
        implants=parse_set(Implant, record.get("implants", "")),
        evidence=record.get("evidence", "") or "",
    )


@dataclass(frozen=True)
class ReportRecord:
    study_id: str
    text: str

    def __post_init__(self):
        if not isinstance(self.study_id, str) or not self.study_id:
            raise ValueError("study_id must be a non-empty string")


@dataclass(frozen=True)
class LabeledCorpus:
    """Findings keyed by study id, plus where the labels came from."""

    entries: dict[str, FractureFinding] = field(default_factory=dict)
    provenance: Provenance = Provenance.RULE_PARSER

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __getitem__(self, study_id: str) -> FractureFinding:
        return self.entries[study_id]

    def __contains__(self, study_id: object) -> bool:
        return study_id in self.entries


@dataclass(frozen=True)
class Prediction:
    """One model output for a study.

    Label-only models carry a finding with no attributes; ``score`` is the
    model's fracture probability when it exposes one.
    """

    finding: FractureFinding
    score: float | None = None

    def __post_init__(self):
        if self.score is not None:
            score = float(self.score)
            if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                raise ValueError(f"score must be finite and within [0, 1], got {self.score!r}")
            object.__setattr__(self, "score", score)

    @property
    def label(self) -> TriClass:
        return self.finding.tri_class


@dataclass(frozen=True)
class PredictionSet:
    model_name: str
    entries: dict[str, Prediction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __getitem__(self, study_id: str) -> Prediction:
        return self.entries[study_id]

    def __contains__(self, study_id: object) -> bool:
        return study_id in self.entries

    @classmethod
    def from_labels(cls, model_name: str, labels: Mapping[str, TriClass],
                    scores: Mapping[str, float] | None = None) -> PredictionSet:
        scores = scores or {}
        return cls(model_name, {
            sid: Prediction(FractureFinding(label), scores.get(sid)) for sid, label in labels.items()
        })

    @classmethod
    def from_corpus(cls, corpus: LabeledCorpus, model_name: str | None = None) -> PredictionSet:
        name = model_name or corpus.provenance.value
        return cls(name, {sid: Prediction(f) for sid, f in corpus.entries.items()})

    def to_corpus(self, provenance: Provenance = Provenance.LEGACY) -> LabeledCorpus:
        return LabeledCorpus({sid: p.finding for sid, p in self.entries.items()}, provenance)


def _powerset(kind: type[enum.Enum]) -> Iterator[frozenset]:
    members = list(kind)
    for r in range(len(members) + 1):
        for combo in itertools.combinations(members, r):
            yield frozenset(combo)


def enumerate_findings() -> Iterator[FractureFinding]:
    """Yield every well-formed finding (evidence empty).

    That is every fracture combination of location set, side, stage and
    implant set, followed by the single normal and other findings.
    """
    for locations in _powerset(Location):
        for side in Side:
            for stage in Stage:
                for implants in _powerset(Implant):
                    yield FractureFinding(TriClass.FRACTURE, locations, side, stage, implants)
    yield FractureFinding(TriClass.NORMAL)
    yield FractureFinding(TriClass.OTHER)
