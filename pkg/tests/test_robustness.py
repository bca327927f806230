from importlib import resources

import pytest
from hypothesis import given, strategies as st

from fracturelab.corpus_io import load_gold
from fracturelab.labeler import Lexicon, RuleLabeler
from fracturelab.model import FractureFinding, ReportRecord, Side, TriClass
from fracturelab.robustness import (
    GoldRecord,
    PerturbationConfig,
    delete,
    load_synonyms,
    perturb_corpus,
    perturb_text,
    protected_tokens,
    robustness_eval,
    score,
    synonym_swap,
    synonym_table_is_closed,
    transpose,
    typo_inject,
    typo_inject_with_stats,
)

TEXT = "No acute fracture. Healed left rib fractures with surgical plates are again noted."


@pytest.mark.parametrize("kwargs", [{"synonym_rate": -0.1}, {"typo_rate": 1.5}, {"seed": 2 ** 70}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PerturbationConfig(**kwargs)


def test_edit_primitives():
    assert transpose("fracture", 0) == "rfacture"
    assert delete("fracture", 7) == "fractur"


def test_rate_zero_is_identity():
    cfg = PerturbationConfig(seed=1, synonym_rate=0.0, typo_rate=0.0)
    assert perturb_text(TEXT, cfg, "k") == TEXT


def test_full_synonym_rate_uses_first_synonym_and_keeps_case():
    cfg = PerturbationConfig(synonym_rate=1.0, typo_rate=0.0)
    assert synonym_swap("Old fracture. OLD fracture.", cfg) == "Chronic fx. CHRONIC fx."


def test_synonym_table_is_closed():
    assert synonym_table_is_closed() == []


def test_closure_probe_checks_negated_contexts():
    text = resources.files("fracturelab").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line != "post_negation\tnot noted"]
    labeler = RuleLabeler(Lexicon.from_lines(lines))
    assert "noted -> seen" in synonym_table_is_closed(labeler=labeler)


def test_synonyms_alone_preserve_fixture_labels():
    result = robustness_eval(load_gold(), PerturbationConfig(seed=7, synonym_rate=1.0, typo_rate=0.0))
    assert result.perturbed.binary == 1.0 and result.perturbed.attribute == 1.0


def test_custom_synonym_file(tmp_path):
    path = tmp_path / "syn.tsv"
    path.write_text("synonym\trib\tcostal bone\n", encoding="utf-8")
    table = load_synonyms(path)
    assert synonym_swap("rib", PerturbationConfig(synonym_rate=1.0), table=table) == "costal bone"
    path.write_text("fracture\tx\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_synonyms(path)


def test_typos_skip_short_and_protected_words():
    cfg = PerturbationConfig(typo_rate=1.0)
    text = "No rib fx. Without fracture; negative for effusion."
    out = typo_inject(text, cfg, "k")
    for word in ("No", "rib", "fx", "Without", "negative"):
        assert word in out
    assert "fracture" not in out and "effusion" not in out


def test_protected_tokens_are_negation_cues():
    assert {"no", "without", "negative"} <= protected_tokens()
    assert "old" not in protected_tokens()


@given(st.text(alphabet="abcdefgh .", max_size=80), st.integers(0, 2 ** 32))
def test_typo_changes_each_perturbed_word_by_one_edit(text, seed):
    cfg = PerturbationConfig(seed=seed, typo_rate=1.0)
    res = typo_inject_with_stats(text, cfg, "k")
    assert res.perturbed == res.eligible
    assert len(text) - res.perturbed <= len(res.text) <= len(text)


def test_typo_rate_is_roughly_honoured():
    text = " ".join(["radiograph"] * 2000)
    res = typo_inject_with_stats(text, PerturbationConfig(seed=5, typo_rate=0.1), "k")
    assert res.eligible == 2000
    assert 150 <= res.perturbed <= 250


def test_determinism_and_key_independence():
    cfg = PerturbationConfig(seed=7)
    recs = [ReportRecord("a", TEXT), ReportRecord("b", TEXT)]
    first = perturb_corpus(recs, cfg)
    assert first == perturb_corpus(recs, cfg)
    assert perturb_corpus(recs[::-1], cfg)[::-1] == first
    assert perturb_corpus(recs, PerturbationConfig(seed=8)) != first


def test_score_pools_attribute_slots():
    gold = [
        GoldRecord(ReportRecord("a", ""), FractureFinding(TriClass.FRACTURE)),
        GoldRecord(ReportRecord("b", ""), FractureFinding(TriClass.NORMAL)),
    ]
    preds = [FractureFinding(TriClass.FRACTURE, side=Side.LEFT), FractureFinding(TriClass.OTHER)]
    acc = score(gold, preds)
    assert acc.binary == 1.0 and acc.tri_class == 0.5
    assert acc.attribute == 0.75 and acc.per_attribute["side"] == 0.0


def test_fixture_corpus_robustness():
    gold = load_gold()
    result = robustness_eval(gold, PerturbationConfig(seed=7, synonym_rate=0.3, typo_rate=0.1))
    assert result.clean.binary == 1.0
    assert result.binary_ratio >= 0.85 and result.attribute_ratio >= 0.85
