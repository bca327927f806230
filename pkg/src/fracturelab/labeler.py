"""Rule-based fracture labeler for free-text radiology reports.

The pipeline per report is: split into sentences, tokenize, match the
lexicon, compute negation scopes, then decide the tri-class label from the
fracture mentions that fall outside every scope. Attributes are read from
cue tokens in the sentences that carry an unnegated mention, ignoring any
token inside a negation scope.

Negation scoping is the classic rightward, sentence-bounded heuristic with
a token cap, broken by contrastive conjunctions, plus a small set of
post-posed cues ("fracture is not seen") that scope leftward.
"""

from __future__ import annotations

import enum
import functools
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicateStudyId, ParseError
from .model import (
    FractureFinding,
    Implant,
    LabeledCorpus,
    Location,
    Provenance,
    ReportRecord,
    Side,
    Stage,
    TriClass,
    parse_enum,
)

logger = logging.getLogger(__name__)

MAX_SCOPE_TOKENS = 12
SCOPE_BREAKS = frozenset({"but", "however", ";", "although", "though", "whereas", "except"})
#: Max tokens allowed between an "adjacent"-only fracture term and its anatomy cue.
ADJACENCY_GAP = 2
#: Only lexicon words at least this long get typo-tolerant variants.
FUZZY_MIN_LENGTH = 6

_TOKEN_RE = re.compile(r"[^\W_]+|;")
_CANDIDATE_RE = re.compile(r"[.!?\n]")
_ABBREVIATIONS = frozenset({"e.g", "i.e", "vs", "approx", "dr", "mr", "mrs", "ms", "etc", "cf", "fig", "st"})
# Real words that are one deletion/transposition away from a lexicon word.
_FUZZY_STOPLIST = frozenset({"emote", "haled", "bodes"})


class Category(enum.Enum):
    FRACTURE = "fracture"
    NEGATION = "negation"
    POST_NEGATION = "post_negation"
    PSEUDO = "pseudo"
    LATERALITY = "laterality"
    STAGE = "stage"
    ANATOMY = "anatomy"
    IMPLANT = "implant"


# Cue categories that a pseudo phrase masks.
_MASKABLE = frozenset({Category.NEGATION, Category.POST_NEGATION, Category.LATERALITY, Category.STAGE})

_PAYLOADS: dict[Category, frozenset[str] | type[enum.Enum] | None] = {
    Category.FRACTURE: frozenset({"", "adjacent"}),
    Category.NEGATION: None,
    Category.POST_NEGATION: None,
    Category.PSEUDO: None,
    Category.LATERALITY: frozenset({"left", "right", "both"}),
    Category.STAGE: frozenset({"acute", "healed"}),
    Category.ANATOMY: Location,
    Category.IMPLANT: Implant,
}


def tokenize(text: str) -> list[str]:
    return [m.group().casefold() for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class LexiconEntry:
    pattern: str
    category: Category
    payload: str = ""

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"empty lexicon pattern {self.pattern!r}")
        allowed = _PAYLOADS[self.category]
        if allowed is None:
            if self.payload:
                raise ValueError(f"{self.category.value} entries take no payload")
        elif isinstance(allowed, frozenset):
            if self.payload not in allowed:
                raise ValueError(f"bad {self.category.value} payload {self.payload!r}")
        else:
            parse_enum(allowed, self.payload)

    @functools.cached_property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tokenize(self.pattern))


def read_table(lines: Iterable[str], source: str = "<lexicon>") -> list[tuple[str, str, str]]:
    """Parse the tab-separated ``category, pattern, payload`` table format."""
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3) or not parts[1].strip():
            raise ParseError(lineno, f"{source}: expected category<TAB>pattern[<TAB>payload]")
        category, pattern = parts[0].strip(), parts[1].strip()
        payload = parts[2].strip() if len(parts) == 3 else ""
        rows.append((category, pattern, payload))
    return rows


@dataclass(frozen=True)
class Match:
    category: Category
    start: int
    end: int
    payload: str = ""


class Lexicon:
    """Indexed set of lexicon entries with typo-tolerant token lookup."""

    def __init__(self, entries: Iterable[LexiconEntry], fuzzy: bool = True):
        self.entries = tuple(entries)
        self.fuzzy = fuzzy
        self._index: dict[str, list[LexiconEntry]] = {}
        for entry in self.entries:
            self._index.setdefault(entry.tokens[0], []).append(entry)
        for bucket in self._index.values():
            bucket.sort(key=lambda e: -len(e.tokens))
        self.vocabulary = frozenset(t for e in self.entries for t in e.tokens)
        self._variants = self._build_variants() if fuzzy else {}

    @classmethod
    def from_lines(cls, lines: Iterable[str], fuzzy: bool = True, source: str = "<lexicon>") -> Lexicon:
        entries = []
        for category, pattern, payload in read_table(lines, source):
            try:
                cat = Category(category)
            except ValueError:
                raise ParseError(None, f"{source}: unknown category {category!r}") from None
            entries.append(LexiconEntry(pattern, cat, payload))
        return cls(entries, fuzzy=fuzzy)

    @classmethod
    def load(cls, path: str | Path | None = None, fuzzy: bool = True) -> Lexicon:
        if path is None:
            text = resources.files("fracturelab").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
            return cls.from_lines(text.splitlines(), fuzzy=fuzzy, source="lexicon.tsv")
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh, fuzzy=fuzzy, source=str(path))

    def _build_variants(self) -> dict[str, str]:
        variants: dict[str, set[str]] = {}
        for word in self.vocabulary:
            if len(word) < FUZZY_MIN_LENGTH or not word.isalpha():
                continue
            for v in _edit_variants(word):
                variants.setdefault(v, set()).add(word)
        return {
            v: next(iter(words))
            for v, words in variants.items()
            if len(words) == 1 and v not in self.vocabulary and v not in _FUZZY_STOPLIST
        }

    def normalize(self, token: str) -> str:
        if token in self.vocabulary:
            return token
        return self._variants.get(token, token)

    def match(self, tokens: Sequence[str]) -> list[Match]:
        """Leftmost-longest, non-overlapping matches per category."""
        norm = [self.normalize(t) for t in tokens]
        n = len(norm)
        found: dict[Category, list[Match]] = {}
        next_free: dict[Category, int] = {}
        for i, tok in enumerate(norm):
            for entry in self._index.get(tok, ()):
                k = len(entry.tokens)
                cat = entry.category
                if i < next_free.get(cat, 0) or i + k > n:
                    continue
                if tuple(norm[i:i + k]) == entry.tokens:
                    found.setdefault(cat, []).append(Match(cat, i, i + k, entry.payload))
                    next_free[cat] = i + k
        masked = set()
        for m in found.get(Category.PSEUDO, ()):
            masked.update(range(m.start, m.end))
        matches = []
        for cat, ms in found.items():
            for m in ms:
                if cat in _MASKABLE and masked.intersection(range(m.start, m.end)):
                    continue
                matches.append(m)
        matches.sort(key=lambda m: (m.start, m.end, m.category.value))
        return matches


def _edit_variants(word: str) -> set[str]:
    out = {word[:i] + word[i + 1:] for i in range(len(word))}
    out.update(word[:i] + word[i + 1] + word[i] + word[i + 2:] for i in range(len(word) - 1))
    out.discard(word)
    return out


@functools.lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    return Lexicon.load()


@dataclass(frozen=True)
class SentenceSpan:
    """A sentence as character offsets into the report, with its tokens.

    ``token_spans`` holds report-level offsets for each token.
    """

    start: int
    end: int
    tokens: tuple[str, ...]
    token_spans: tuple[tuple[int, int], ...] = ()

    def text(self, report: str) -> str:
        return report[self.start:self.end]


def _is_boundary(text: str, i: int) -> bool:
    ch = text[i]
    if ch == "\n":
        return True
    if ch not in ".!?":
        return False
    if i + 1 < len(text) and not text[i + 1].isspace():
        return False
    if ch == ".":
        j = i
        while j > 0 and not text[j - 1].isspace():
            j -= 1
        word = text[j:i].casefold()
        if word.isdigit() or word in _ABBREVIATIONS:
            return False
    return True


def split_sentences(text: str) -> list[SentenceSpan]:
    """Split a report into trimmed, ordered, non-overlapping sentence spans."""
    spans = []
    start = 0
    n = len(text)
    cuts = [m.start() for m in _CANDIDATE_RE.finditer(text) if _is_boundary(text, m.start())]
    for i in cuts + [n]:
        end = i + 1 if i < n and text[i] != "\n" else i
        s, e = start, min(end, n)
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if s < e:
            found = tuple((m.start(), m.end()) for m in _TOKEN_RE.finditer(text, s, e))
            tokens = tuple(text[a:b].casefold() for a, b in found)
            spans.append(SentenceSpan(s, e, tokens, found))
        start = i + 1
    return spans


@dataclass(frozen=True)
class Mention:
    start: int
    end: int
    negated: bool


@dataclass(frozen=True)
class SentenceAnalysis:
    span: SentenceSpan
    matches: tuple[Match, ...]
    scopes: frozenset[tuple[int, int]]
    mentions: tuple[Mention, ...]

    def in_scope(self, index: int) -> bool:
        return any(a <= index < b for a, b in self.scopes)

    @property
    def has_unnegated(self) -> bool:
        return any(not m.negated for m in self.mentions)

    def cues(self, category: Category) -> list[Match]:
        """Matches of ``category`` lying wholly outside every negation scope."""
        return [
            m for m in self.matches
            if m.category is category and not any(self.in_scope(i) for i in range(m.start, m.end))
        ]


@dataclass(frozen=True)
class ReportAnalysis:
    text: str
    sentences: tuple[SentenceAnalysis, ...]

    @property
    def tri_class(self) -> TriClass:
        mentions = [m for s in self.sentences for m in s.mentions]
        if not mentions:
            return TriClass.OTHER
        if any(not m.negated for m in mentions):
            return TriClass.FRACTURE
        return TriClass.NORMAL

    def supporting_sentences(self) -> list[SentenceAnalysis]:
        return [s for s in self.sentences if s.has_unnegated]


class RuleLabeler:
    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon or default_lexicon()

    # -- sentence level ----------------------------------------------------

    def _scopes(self, tokens: Sequence[str], matches: Sequence[Match]) -> frozenset[tuple[int, int]]:
        n = len(tokens)
        breaks = [i for i, t in enumerate(tokens) if t in SCOPE_BREAKS]
        scopes = set()
        for m in matches:
            if m.category is Category.NEGATION:
                stop = min([b for b in breaks if b >= m.end] + [n, m.end + MAX_SCOPE_TOKENS])
                if stop > m.end:
                    scopes.add((m.end, stop))
            elif m.category is Category.POST_NEGATION:
                first = max([b + 1 for b in breaks if b < m.start] + [0, m.start - MAX_SCOPE_TOKENS])
                if first < m.start:
                    scopes.add((first, m.start))
        return frozenset(scopes)

    def _mentions(self, matches: Sequence[Match]) -> list[tuple[int, int]]:
        anatomy = [m for m in matches if m.category is Category.ANATOMY]
        out = []
        for m in matches:
            if m.category is not Category.FRACTURE:
                continue
            if m.payload == "adjacent" and not any(
                0 <= m.start - a.end <= ADJACENCY_GAP or 0 <= a.start - m.end <= ADJACENCY_GAP
                for a in anatomy
            ):
                continue
            out.append((m.start, m.end))
        return out

    def detect_fracture_mentions(self, sentence: SentenceSpan) -> list[tuple[int, int]]:
        """Token ranges of fracture mentions in a sentence."""
        return self._mentions(self.lexicon.match(sentence.tokens))

    def negation_scopes(self, sentence: SentenceSpan) -> frozenset[tuple[int, int]]:
        """Half-open token ranges governed by a negation cue."""
        return self._scopes(sentence.tokens, self.lexicon.match(sentence.tokens))

    def analyze_sentence(self, span: SentenceSpan) -> SentenceAnalysis:
        matches = self.lexicon.match(span.tokens)
        scopes = self._scopes(span.tokens, matches)
        mentions = tuple(
            Mention(a, b, any(lo <= a < hi for lo, hi in scopes)) for a, b in self._mentions(matches)
        )
        return SentenceAnalysis(span, tuple(matches), scopes, mentions)

    # -- report level ------------------------------------------------------

    def analyze(self, text: str) -> ReportAnalysis:
        return ReportAnalysis(text, tuple(self.analyze_sentence(s) for s in split_sentences(text)))

    def classify_report(self, text: str) -> TriClass:
        return self.analyze(text).tri_class

    def extract_attributes(self, text: str) -> FractureFinding:
        return finding_from_analysis(self.analyze(text))

    def label_corpus(self, corpus: Sequence[ReportRecord], jobs: int = 1) -> LabeledCorpus:
        """Label every record; output is keyed by study id and order-independent."""
        seen = set()
        for record in corpus:
            if record.study_id in seen:
                raise DuplicateStudyId(record.study_id)
            seen.add(record.study_id)
        texts = [r.text for r in corpus]
        if jobs > 1 and len(texts) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                findings = list(pool.map(self.extract_attributes, texts, chunksize=64))
        else:
            findings = [self.extract_attributes(t) for t in texts]
        return LabeledCorpus(
            {r.study_id: f for r, f in zip(corpus, findings)}, Provenance.RULE_PARSER
        )


def finding_from_analysis(analysis: ReportAnalysis) -> FractureFinding:
    tri = analysis.tri_class
    if tri is TriClass.OTHER:
        return FractureFinding(TriClass.OTHER)
    if tri is TriClass.NORMAL:
        first = next(s for s in analysis.sentences if s.mentions)
        return FractureFinding(TriClass.NORMAL, evidence=first.span.text(analysis.text))

    support = analysis.supporting_sentences()
    locations: set[Location] = set()
    implants: set[Implant] = set()
    sides: set[str] = set()
    stages: set[str] = set()
    for s in support:
        locations.update(Location(m.payload) for m in s.cues(Category.ANATOMY))
        implants.update(Implant(m.payload) for m in s.cues(Category.IMPLANT))
        sides.update(m.payload for m in s.cues(Category.LATERALITY))
        stages.update(m.payload for m in s.cues(Category.STAGE))

    if "both" in sides or {"left", "right"} <= sides:
        side = Side.BOTH
    elif "left" in sides:
        side = Side.LEFT
    elif "right" in sides:
        side = Side.RIGHT
    else:
        side = Side.NONE
    # Acute dominates healed when a report mentions both.
    if "acute" in stages:
        stage = Stage.ACUTE
    elif "healed" in stages:
        stage = Stage.HEALED
    else:
        stage = Stage.OTHER
    return FractureFinding(
        TriClass.FRACTURE, locations, side, stage, implants,
        evidence=support[0].span.text(analysis.text),
    )


@functools.lru_cache(maxsize=None)
def default_labeler() -> RuleLabeler:
    return RuleLabeler()


def detect_fracture_mentions(sentence: SentenceSpan) -> list[tuple[int, int]]:
    return default_labeler().detect_fracture_mentions(sentence)


def negation_scopes(sentence: SentenceSpan) -> frozenset[tuple[int, int]]:
    return default_labeler().negation_scopes(sentence)


def classify_report(text: str) -> TriClass:
    return default_labeler().classify_report(text)


def extract_attributes(text: str) -> FractureFinding:
    return default_labeler().extract_attributes(text)


def label_corpus(corpus: Sequence[ReportRecord], jobs: int = 1) -> LabeledCorpus:
    return default_labeler().label_corpus(corpus, jobs=jobs)
