"""Render findings as canonical, location-specific template sentences.

Every word a template emits is either a lexicon pattern word or one of
``FUNCTION_WORDS``, so the rule labeler reads a rendered finding back to
the same finding (evidence aside).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .model import FractureFinding, Implant, LabeledCorpus, Location, Side, Stage, TriClass

NORMAL_SENTENCE = "No evidence of fracture."

FUNCTION_WORDS = frozenset({"of", "the", "with", "and", "in", "place", "no", "evidence"})

STAGE_ADJECTIVES = {Stage.ACUTE: "acute", Stage.HEALED: "healed", Stage.OTHER: ""}
SIDE_ADJECTIVES = {Side.LEFT: "left", Side.RIGHT: "right", Side.BOTH: "bilateral", Side.NONE: ""}

# One noun phrase per location; each skeleton is
# "{stage} fracture of the {side} {location}{implant clause}."
LOCATION_PHRASES = {
    Location.RIBS: "ribs",
    Location.CLAVICLE: "clavicle",
    Location.SHOULDER: "shoulder",
    Location.SPINE: "thoracic spine",
    Location.STERNUM: "sternum",
    Location.SCAPULA: "scapula",
    Location.STERNAL_WIRES: "sternal wires",
    Location.OTHER: "other bone",
}

IMPLANT_NOUNS = {
    Implant.SCREWS: "screws",
    Implant.RODS: "rods",
    Implant.PLATES: "plates",
    Implant.OTHER: "hardware",
}


def _join_nouns(nouns: list[str]) -> str:
    if len(nouns) == 1:
        return nouns[0]
    return ", ".join(nouns[:-1]) + " and " + nouns[-1]


def _sentence(words: list[str], tail: str) -> str:
    body = " ".join(w for w in words if w) + tail + "."
    return body[0].upper() + body[1:]


@dataclass(frozen=True)
class TemplateGrammar:
    """Slot fillers for the skeleton "{stage} fracture of the {side} {location}{implants}."

    Every table must cover its whole enum; :meth:`unknown_words` lists any
    filler word a lexicon would not recognize.
    """

    stage_adjectives: Mapping[Stage, str] = field(default_factory=lambda: dict(STAGE_ADJECTIVES))
    side_adjectives: Mapping[Side, str] = field(default_factory=lambda: dict(SIDE_ADJECTIVES))
    location_phrases: Mapping[Location, str] = field(default_factory=lambda: dict(LOCATION_PHRASES))
    implant_nouns: Mapping[Implant, str] = field(default_factory=lambda: dict(IMPLANT_NOUNS))
    normal_sentence: str = NORMAL_SENTENCE

    def __post_init__(self):
        for kind, table in ((Stage, self.stage_adjectives), (Side, self.side_adjectives),
                            (Location, self.location_phrases), (Implant, self.implant_nouns)):
            missing = [m.value for m in kind if m not in table]
            if missing:
                raise ValueError(f"template grammar lacks {kind.__name__} fillers: {', '.join(missing)}")

    def words(self) -> set[str]:
        tables = (self.stage_adjectives, self.side_adjectives, self.location_phrases, self.implant_nouns)
        text = " ".join(v for t in tables for v in t.values()) + " fracture " + self.normal_sentence
        return set(re.findall(r"[^\W_]+", text.casefold()))

    def unknown_words(self, vocabulary: Iterable[str]) -> set[str]:
        return self.words() - set(vocabulary) - FUNCTION_WORDS

    def _implant_clause(self, implants: Iterable[Implant]) -> str:
        present = set(implants)
        nouns = [self.implant_nouns[i] for i in Implant if i in present]
        if not nouns:
            return ""
        return f", with {_join_nouns(nouns)} in place"

    def render(self, finding: FractureFinding) -> str:
        if finding.tri_class is TriClass.NORMAL:
            return self.normal_sentence
        if finding.tri_class is TriClass.OTHER:
            return ""
        stage = self.stage_adjectives[finding.stage]
        side = self.side_adjectives[finding.side]
        tail = self._implant_clause(finding.implants)
        if not finding.locations:
            return _sentence([stage, side, "fracture"], tail)
        sentences = []
        for location in Location:
            if location in finding.locations:
                words = [stage, "fracture of the", side, self.location_phrases[location]]
                sentences.append(_sentence(words, tail))
        return " ".join(sentences)


DEFAULT_GRAMMAR = TemplateGrammar()


def render_finding(finding: FractureFinding, grammar: TemplateGrammar = DEFAULT_GRAMMAR) -> str:
    """Render ``finding`` as template text.

    Fractures produce one sentence per location (a location-less fracture
    still gets one sentence); normals produce a fixed negation sentence and
    ``Other`` renders as the empty string.
    """
    return grammar.render(finding)


def render_corpus(corpus: LabeledCorpus, grammar: TemplateGrammar = DEFAULT_GRAMMAR) -> list[tuple[str, str]]:
    return [(sid, grammar.render(corpus.entries[sid])) for sid in sorted(corpus.entries)]
