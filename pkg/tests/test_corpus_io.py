import json

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from fracturelab.aggregate import audit
from fracturelab.corpus_io import (
    CorpusFile,
    CorpusFormat,
    atomic_write_text,
    load_gold,
    load_labels,
    load_legacy,
    load_predictions,
    load_reports,
    write_discrepancies,
    write_labels,
    write_legacy,
    write_reports,
)
from fracturelab.errors import DuplicateStudyId, ParseError, UnknownToken
from fracturelab.model import (
    FractureFinding,
    LabeledCorpus,
    Implant,
    Location,
    Prediction,
    PredictionSet,
    Provenance,
    ReportRecord,
    Side,
    Stage,
    TriClass,
)

texts = st.text(alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"), max_size=50)


@pytest.mark.parametrize("suffix", [".csv", ".jsonl"])
@settings(max_examples=50, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(texts, max_size=5))
def test_reports_round_trip(tmp_path, suffix, bodies):
    recs = [ReportRecord(f"id{i}", t) for i, t in enumerate(bodies)]
    path = tmp_path / f"r{suffix}"
    write_reports(recs, path)
    assert load_reports(path) == recs


def test_reports_errors(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("study_id,text\na,x\na,y\n", encoding="utf-8")
    with pytest.raises(DuplicateStudyId) as info:
        load_reports(p)
    assert info.value.line == 3
    p.write_text("id,text\na,x\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_reports(p)
    j = tmp_path / "r.jsonl"
    j.write_text('{"study_id": "a", "text": "x"}\n{oops\n', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_reports(j)
    assert info.value.line == 2


def test_labels_round_trip(tmp_path):
    corpus = LabeledCorpus({
        "b": FractureFinding(TriClass.FRACTURE, {Location.RIBS, Location.STERNAL_WIRES}, evidence='a, "b"\nc'),
        "a": FractureFinding(TriClass.NORMAL, evidence="No fracture."),
    }, Provenance.RULE_PARSER)
    path = tmp_path / "labels.csv"
    write_labels(corpus, path)
    assert load_labels(path) == corpus
    assert path.read_text(encoding="utf-8").splitlines()[0] == \
        "study_id,tri_class,locations,side,stage,implants,evidence,provenance"


def test_predictions_round_trip(tmp_path):
    preds = PredictionSet("m", {"a": Prediction(FractureFinding(TriClass.FRACTURE), 0.1 + 0.2),
                                "b": Prediction(FractureFinding(TriClass.OTHER))})
    path = tmp_path / "m.csv"
    write_labels(preds, path)
    assert load_predictions(path) == preds
    assert load_labels(path) == preds


def test_labels_unknown_token_reports_line(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("study_id,tri_class,locations\na,fracture,ribs\nb,fracture,knee\n", encoding="utf-8")
    with pytest.raises(UnknownToken) as info:
        load_labels(p)
    assert info.value.line == 3 and info.value.token == "knee"


def test_labels_reject_attributes_on_normal(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("study_id,tri_class,side\na,normal,left\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_labels(p)


def test_labels_reject_bad_score(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("study_id,tri_class,score\na,fracture,1.5\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_predictions(p)


def test_labels_jsonl_with_lists(tmp_path):
    p = tmp_path / "l.jsonl"
    p.write_text(json.dumps({"study_id": "a", "tri_class": "fracture", "locations": ["ribs", "spine"]}) + "\n",
                 encoding="utf-8")
    assert load_labels(p)["a"].locations == {Location.RIBS, Location.SPINE}


def test_legacy_table(tmp_path, data_dir):
    table = load_legacy(data_dir / "table1_legacy.csv")
    assert table["59981256"] is None and table["54759244"] == 1.0
    out = tmp_path / "legacy.csv"
    write_legacy({"a": None, "b": -1.0, "c": 0.0}, out)
    assert load_legacy(out) == {"a": None, "b": -1.0, "c": 0.0}
    out.write_text("study_id,fracture\na,2\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_legacy(out)


def test_discrepancy_csv(tmp_path):
    relabeled = LabeledCorpus({"a": FractureFinding(TriClass.FRACTURE, evidence="Rib fracture.")})
    path = tmp_path / "d.csv"
    write_discrepancies(audit({"a": None}, relabeled), path)
    assert path.read_bytes() == b"study_id,legacy,relabeled,quote\r\na,,fracture,Rib fracture.\r\n"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_bundled_gold_corpus():
    gold = load_gold()
    assert len(gold) >= 100
    classes = {g.expected.tri_class for g in gold}
    assert classes == set(TriClass)
    fractures = [g.expected for g in gold if g.expected.is_fracture]
    assert set().union(*(f.locations for f in fractures)) == set(Location)
    assert set().union(*(f.implants for f in fractures)) == set(Implant)
    assert {f.side for f in fractures} == set(Side)
    assert {f.stage for f in fractures} == set(Stage)


def test_corpus_file_sniffs_extension():
    assert CorpusFile.of("a/b.JSONL").format is CorpusFormat.JSONL
    assert CorpusFile.of("b.ndjson").format is CorpusFormat.JSONL
    assert CorpusFile.of("b.csv").format is CorpusFormat.CSV


def test_reports_quoted_comma_and_duplicate_line(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text('study_id,text\na,"Rib fracture, left."\nb,x\n', encoding="utf-8")
    assert load_reports(p) == [ReportRecord("a", "Rib fracture, left."), ReportRecord("b", "x")]
    rows = "".join(f"s{i},t\n" for i in range(5))
    p.write_text("study_id,text\n" + rows + "s2,dup\n", encoding="utf-8")
    with pytest.raises(DuplicateStudyId) as info:
        load_reports(p)
    assert info.value.line == 7
