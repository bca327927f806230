"""Reading and writing report corpora, label files and audit tables.

Reports come as CSV (``study_id,text``) or JSONL (one ``{"study_id", "text"}``
object per line), chosen by file extension. Label and prediction files use
the flat record schema from :mod:`fracturelab.model`, optionally with a
``provenance`` or ``score`` column. All writes are atomic.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
import tempfile
from importlib import resources
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .aggregate import AuditResult
from .errors import DuplicateStudyId, InvalidFinding, ParseError, UnknownToken
from .model import (
    FLAT_FIELDS,
    FractureFinding,
    LabeledCorpus,
    Prediction,
    PredictionSet,
    Provenance,
    ReportRecord,
    deserialize_finding,
    parse_enum,
    serialize_finding,
)
from .robustness import GoldRecord

JSONL_SUFFIXES = {".jsonl", ".ndjson"}
REPORT_FIELDS = ("study_id", "text")
LEGACY_FIELDS = ("study_id", "fracture")
GOLD_FIELDS = ("study_id", "text", "tri_class")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


class CorpusFormat(enum.Enum):
    CSV = "csv"
    JSONL = "jsonl"


@dataclass(frozen=True)
class CorpusFile:
    """A corpus path and the format sniffed from its extension."""

    path: Path
    format: CorpusFormat

    @classmethod
    def of(cls, path: str | Path) -> CorpusFile:
        path = Path(path)
        fmt = CorpusFormat.JSONL if path.suffix.lower() in JSONL_SUFFIXES else CorpusFormat.CSV
        return cls(path, fmt)


def _is_jsonl(path: Path) -> bool:
    return CorpusFile.of(path).format is CorpusFormat.JSONL


def read_rows(path: str | Path, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield ``(line_number, row)`` from a CSV or JSONL file."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return _parse_rows(text, _is_jsonl(path), required)


def _parse_rows(text: str, jsonl: bool, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    if jsonl:
        # Only "\n" ends a record; str.splitlines would also split on U+2028
        # and friends, which may legally appear unescaped inside JSON strings.
        for lineno, line in enumerate(text.split("\n"), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(lineno, "expected a JSON object")
            missing = [k for k in required if k not in obj]
            if missing:
                raise ParseError(lineno, f"missing keys: {', '.join(missing)}")
            yield lineno, obj
        return
    reader = csv.DictReader(io.StringIO(text, newline=""))
    header = reader.fieldnames or []
    missing = [k for k in required if k not in header]
    if missing:
        raise ParseError(1, f"missing columns: {', '.join(missing)}")
    for row in reader:
        if None in row:
            raise ParseError(reader.line_num, "row has more fields than the header")
        yield reader.line_num, {k: ("" if v is None else v) for k, v in row.items()}


def _study_id(row: dict, lineno: int) -> str:
    sid = row.get("study_id")
    if sid is None or (isinstance(sid, str) and not sid.strip()):
        raise ParseError(lineno, "empty study_id")
    return str(sid)


def load_reports(path: str | Path) -> list[ReportRecord]:
    records = []
    seen: set[str] = set()
    for lineno, row in read_rows(path, REPORT_FIELDS):
        sid = _study_id(row, lineno)
        if sid in seen:
            raise DuplicateStudyId(sid, lineno)
        seen.add(sid)
        text = row.get("text")
        if not isinstance(text, str):
            raise ParseError(lineno, "text must be a string")
        records.append(ReportRecord(sid, text))
    return records


def write_reports(records: Sequence[ReportRecord], path: str | Path) -> None:
    path = Path(path)
    if _is_jsonl(path):
        text = "".join(json.dumps({"study_id": r.study_id, "text": r.text}, ensure_ascii=False) + "\n"
                       for r in records)
    else:
        text = csv_text(REPORT_FIELDS, ((r.study_id, r.text) for r in records))
    atomic_write_text(path, text)


def _finding_fields(row: dict) -> dict[str, str]:
    out = {}
    for key in FLAT_FIELDS[1:]:
        value = row.get(key, "")
        if isinstance(value, list):
            value = ";".join(str(v) for v in value)
        out[key] = "" if value is None else str(value)
    return out


def _parse_finding(row: dict, lineno: int) -> FractureFinding:
    try:
        return deserialize_finding(_finding_fields(row))
    except UnknownToken as exc:
        raise UnknownToken(exc.kind, exc.token, lineno) from None
    except InvalidFinding as exc:
        raise ParseError(lineno, str(exc)) from None


def _parse_score(value, lineno: int) -> float | None:
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    try:
        score = float(value)
    except (TypeError, ValueError):
        raise ParseError(lineno, f"bad score {value!r}") from None
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise ParseError(lineno, f"score must be finite and within [0, 1], got {value!r}")
    return score


def _label_rows(path: str | Path):
    seen: set[str] = set()
    for lineno, row in read_rows(path, ("study_id", "tri_class")):
        sid = _study_id(row, lineno)
        if sid in seen:
            raise DuplicateStudyId(sid, lineno)
        seen.add(sid)
        yield lineno, sid, row


def _has_column(path: str | Path, column: str) -> bool:
    path = Path(path)
    if _is_jsonl(path):
        return any(column in row for _, row in read_rows(path, ()))
    with open(path, encoding="utf-8", newline="") as fh:
        return column in (csv.DictReader(fh).fieldnames or [])


def load_predictions(path: str | Path, model_name: str | None = None) -> PredictionSet:
    entries = {}
    for lineno, sid, row in _label_rows(path):
        entries[sid] = Prediction(_parse_finding(row, lineno), _parse_score(row.get("score"), lineno))
    return PredictionSet(model_name or Path(path).stem, entries)


def load_labels(path: str | Path, model_name: str | None = None) -> LabeledCorpus | PredictionSet:
    """Load a flat-schema label file.

    Files with a ``score`` column load as a :class:`PredictionSet`; all
    others as a :class:`LabeledCorpus` whose provenance comes from the
    ``provenance`` column, or ``legacy`` when there is none.
    """
    if _has_column(path, "score"):
        return load_predictions(path, model_name)
    entries = {}
    provenances = set()
    for lineno, sid, row in _label_rows(path):
        entries[sid] = _parse_finding(row, lineno)
        if row.get("provenance"):
            try:
                provenances.add(parse_enum(Provenance, row["provenance"]))
            except UnknownToken as exc:
                raise UnknownToken(exc.kind, exc.token, lineno) from None
    if len(provenances) > 1:
        raise ParseError(None, f"mixed provenance values in {path}")
    provenance = provenances.pop() if provenances else Provenance.LEGACY
    return LabeledCorpus(entries, provenance)


def labels_csv_text(labels: LabeledCorpus | PredictionSet) -> str:
    if isinstance(labels, PredictionSet):
        header = FLAT_FIELDS + ("score",)
        rows = []
        for sid, pred in labels.entries.items():
            flat = serialize_finding(pred.finding)
            score = "" if pred.score is None else repr(pred.score)
            rows.append([sid, *flat.values(), score])
    else:
        header = FLAT_FIELDS + ("provenance",)
        rows = [[sid, *serialize_finding(f).values(), labels.provenance.value]
                for sid, f in labels.entries.items()]
    rows.sort(key=lambda r: r[0])
    return csv_text(header, rows)


def write_labels(labels: LabeledCorpus | PredictionSet, path: str | Path) -> None:
    """Write labels as flat-schema CSV sorted by study id."""
    atomic_write_text(path, labels_csv_text(labels))


def load_legacy(path: str | Path) -> dict[str, float | None]:
    """Read a legacy ``study_id,fracture`` table; blank means absent."""
    table: dict[str, float | None] = {}
    for lineno, row in read_rows(path, LEGACY_FIELDS):
        sid = _study_id(row, lineno)
        if sid in table:
            raise DuplicateStudyId(sid, lineno)
        raw = row.get("fracture")
        if raw is None or (isinstance(raw, str) and raw.strip().casefold() in ("", "nan")):
            table[sid] = None
            continue
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ParseError(lineno, f"bad legacy label {raw!r}") from None
        if value not in (1.0, 0.0, -1.0):
            raise ParseError(lineno, f"legacy label must be 1, 0, -1 or blank, got {raw!r}")
        table[sid] = value
    return table


def write_legacy(table: dict[str, float | None], path: str | Path) -> None:
    rows = [(sid, "" if v is None else repr(float(v))) for sid, v in sorted(table.items())]
    atomic_write_text(path, csv_text(LEGACY_FIELDS, rows))


def write_discrepancies(result: AuditResult, path: str | Path) -> None:
    rows = [
        (d.study_id, "" if d.legacy is None else repr(d.legacy), d.relabeled.value, d.quote)
        for d in result.discrepancies
    ]
    atomic_write_text(path, csv_text(("study_id", "legacy", "relabeled", "quote"), rows))


def load_gold(path: str | Path | None = None) -> list[GoldRecord]:
    """Load a hand-labeled JSONL corpus: report fields plus expected finding fields.

    With no path, loads the fixture corpus bundled with the package.
    """
    if path is None:
        text = resources.files("fracturelab").joinpath("data/fixture_corpus.jsonl").read_text(encoding="utf-8")
        rows = _parse_rows(text, True, GOLD_FIELDS)
    else:
        rows = read_rows(path, GOLD_FIELDS)
    gold = []
    seen: set[str] = set()
    for lineno, row in rows:
        sid = _study_id(row, lineno)
        if sid in seen:
            raise DuplicateStudyId(sid, lineno)
        seen.add(sid)
        gold.append(GoldRecord(ReportRecord(sid, row["text"]), _parse_finding({**row, "evidence": ""}, lineno)))
    return gold
