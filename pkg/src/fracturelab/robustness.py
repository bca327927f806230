"""Seeded lexical perturbations (synonyms, typos) and a robustness check.

Each record gets its own random stream derived from ``(seed, key)``,
usually the study id, so results do not depend on processing order.
"""

from __future__ import annotations

import functools
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .labeler import Category, RuleLabeler, default_labeler, default_lexicon, read_table
from .metrics import binarize
from .model import FractureFinding, ReportRecord

DEFAULT_SYNONYM_RATE = 0.3
DEFAULT_TYPO_RATE = 0.1
MIN_TYPO_LENGTH = 4

_WORD_RE = re.compile(r"[A-Za-z]+")


@dataclass(frozen=True)
class PerturbationConfig:
    seed: int = 0
    synonym_rate: float = DEFAULT_SYNONYM_RATE
    typo_rate: float = DEFAULT_TYPO_RATE

    def __post_init__(self):
        for name in ("synonym_rate", "typo_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {rate}")
        if not -(2 ** 63) <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


def stream(seed: int, key: str, purpose: str) -> random.Random:
    # str seeds hash through SHA-512, so this is stable across processes.
    return random.Random(f"{seed}:{purpose}:{key}")


def load_synonyms(path: str | Path | None = None) -> dict[str, list[str]]:
    if path is None:
        text = resources.files("fracturelab").joinpath("data/synonyms.tsv").read_text(encoding="utf-8")
        lines, source = text.splitlines(), "synonyms.tsv"
    else:
        lines, source = Path(path).read_text(encoding="utf-8").splitlines(), str(path)
    table: dict[str, list[str]] = {}
    for category, word, replacement in read_table(lines, source):
        if category != "synonym" or not replacement:
            raise ValueError(f"{source}: expected 'synonym<TAB>word<TAB>replacement' rows")
        table.setdefault(word.casefold(), []).append(replacement)
    return table


@functools.lru_cache(maxsize=None)
def default_synonyms() -> dict[str, list[str]]:
    return load_synonyms()


@functools.lru_cache(maxsize=None)
def protected_tokens() -> frozenset[str]:
    """Tokens of negation-type cues, which typos never touch."""
    cats = {Category.NEGATION, Category.POST_NEGATION}
    return frozenset(t for e in default_lexicon().entries if e.category in cats for t in e.tokens)


def _match_case(source: str, replacement: str) -> str:
    if len(source) > 1 and source.isupper():
        return replacement.upper()
    if source[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def synonym_swap(text: str, cfg: PerturbationConfig, key: str = "",
                 table: dict[str, list[str]] | None = None) -> str:
    """Replace table words by their first listed synonym with probability ``synonym_rate``."""
    table = default_synonyms() if table is None else table
    rng = stream(cfg.seed, key, "synonym")

    def swap(m: re.Match) -> str:
        word = m.group()
        options = table.get(word.casefold())
        if not options:
            return word
        if rng.random() < cfg.synonym_rate:
            return _match_case(word, options[0])
        return word

    return _WORD_RE.sub(swap, text)


def transpose(word: str, i: int) -> str:
    """Swap characters ``i`` and ``i + 1``."""
    return word[:i] + word[i + 1] + word[i] + word[i + 2:]


def delete(word: str, i: int) -> str:
    return word[:i] + word[i + 1:]


@dataclass(frozen=True)
class TypoResult:
    text: str
    eligible: int
    perturbed: int


def typo_inject_with_stats(text: str, cfg: PerturbationConfig, key: str = "") -> TypoResult:
    rng = stream(cfg.seed, key, "typo")
    protected = protected_tokens()
    eligible = perturbed = 0

    def mutate(m: re.Match) -> str:
        nonlocal eligible, perturbed
        word = m.group()
        if len(word) < MIN_TYPO_LENGTH or word.casefold() in protected:
            return word
        eligible += 1
        if rng.random() >= cfg.typo_rate:
            return word
        perturbed += 1
        swappable = [i for i in range(len(word) - 1) if word[i] != word[i + 1]]
        if swappable and rng.random() < 0.5:
            return transpose(word, rng.choice(swappable))
        return delete(word, rng.randrange(len(word)))

    out = _WORD_RE.sub(mutate, text)
    return TypoResult(out, eligible, perturbed)


def typo_inject(text: str, cfg: PerturbationConfig, key: str = "") -> str:
    """Apply one transposition or deletion to each eligible word with probability ``typo_rate``.

    Words shorter than four letters and negation cue words are never changed.
    """
    return typo_inject_with_stats(text, cfg, key).text


def perturb_text(text: str, cfg: PerturbationConfig, key: str = "") -> str:
    return typo_inject(synonym_swap(text, cfg, key), cfg, key)


def perturb_corpus(records: Sequence[ReportRecord], cfg: PerturbationConfig) -> list[ReportRecord]:
    return [ReportRecord(r.study_id, perturb_text(r.text, cfg, r.study_id)) for r in records]


@dataclass(frozen=True)
class GoldRecord:
    record: ReportRecord
    expected: FractureFinding


ATTRIBUTE_TASKS = ("location", "side", "stage", "implants")


def _attribute_hits(pred: FractureFinding, truth: FractureFinding) -> dict[str, bool]:
    return {
        "location": pred.locations == truth.locations,
        "side": pred.side == truth.side,
        "stage": pred.stage == truth.stage,
        "implants": pred.implants == truth.implants,
    }


@dataclass(frozen=True)
class Accuracy:
    binary: float
    tri_class: float
    attribute: float
    per_attribute: dict[str, float]


def score(gold: Sequence[GoldRecord], predicted: Sequence[FractureFinding]) -> Accuracy:
    """Binary, tri-class and attribute accuracy of predictions against gold.

    Attribute accuracy is computed over gold fracture records, pooling the
    four attribute slots; ``per_attribute`` breaks it down per slot.
    """
    if not gold:
        raise ValueError("empty gold corpus")
    binary = sum(binarize(p.tri_class) == binarize(g.expected.tri_class) for g, p in zip(gold, predicted))
    tri = sum(p.tri_class == g.expected.tri_class for g, p in zip(gold, predicted))
    hits = {t: 0 for t in ATTRIBUTE_TASKS}
    n_frac = 0
    for g, p in zip(gold, predicted):
        if not g.expected.is_fracture:
            continue
        n_frac += 1
        for task, ok in _attribute_hits(p, g.expected).items():
            hits[task] += ok
    per = {t: (hits[t] / n_frac if n_frac else 1.0) for t in ATTRIBUTE_TASKS}
    attribute = sum(hits.values()) / (4 * n_frac) if n_frac else 1.0
    return Accuracy(binary / len(gold), tri / len(gold), attribute, per)


@dataclass(frozen=True)
class RobustnessResult:
    clean: Accuracy
    perturbed: Accuracy
    perturbed_texts: tuple[str, ...]

    @property
    def binary_ratio(self) -> float:
        return self.perturbed.binary / self.clean.binary if self.clean.binary else 0.0

    @property
    def attribute_ratio(self) -> float:
        return self.perturbed.attribute / self.clean.attribute if self.clean.attribute else 0.0


def robustness_eval(gold: Sequence[GoldRecord], cfg: PerturbationConfig,
                    labeler: RuleLabeler | None = None) -> RobustnessResult:
    labeler = labeler or default_labeler()
    clean = [labeler.extract_attributes(g.record.text) for g in gold]
    texts = tuple(perturb_text(g.record.text, cfg, g.record.study_id) for g in gold)
    noisy = [labeler.extract_attributes(t) for t in texts]
    return RobustnessResult(score(gold, clean), score(gold, noisy), texts)


# Contexts a synonym is tried in: plain, under a leading negation cue and
# under a trailing one.
_PROBES = ("{} rib fracture.", "No {} rib fracture.", "Rib fracture is not {}.")


def synonym_table_is_closed(table: dict[str, list[str]] | None = None,
                            labeler: RuleLabeler | None = None) -> list[str]:
    """Return table rows whose replacement changes what the labeler reads.

    Each word and its replacement are dropped into the same probe sentences;
    an empty result means every synonym is label-preserving.
    """
    table = default_synonyms() if table is None else table
    labeler = labeler or default_labeler()

    def reading(word: str) -> tuple[FractureFinding, ...]:
        return tuple(labeler.extract_attributes(p.format(word)).without_evidence() for p in _PROBES)

    return [
        f"{word} -> {option}"
        for word, options in table.items()
        for option in options
        if reading(word) != reading(option)
    ]
