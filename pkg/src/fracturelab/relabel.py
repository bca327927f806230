"""Batched LLM annotation of reports into structured fracture findings.

A request pairs a fixed radiologist-style system prompt with the report
text. Responses must be JSON matching the bundled schema and must quote
their supporting snippet verbatim from the report. Transports are plain
callables ``transport(request) -> str``; raise
:class:`~fracturelab.errors.TransientTransportError` for failures worth
retrying.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import re
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

import jsonschema

from .errors import BatchAborted, QuoteNotFound, SchemaViolation, TransientTransportError, UnknownToken
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

SCHEMA_ID = "fracture-annotation/v1"
_SCHEMA_FILES = {SCHEMA_ID: "annotation_schema_v1.json"}

ENV_ENDPOINT = "ANNOTATOR_ENDPOINT"
ENV_KEY = "ANNOTATOR_KEY"
ENV_MODEL = "ANNOTATOR_MODEL"


@functools.lru_cache(maxsize=None)
def load_schema(schema_id: str = SCHEMA_ID) -> dict:
    try:
        name = _SCHEMA_FILES[schema_id]
    except KeyError:
        raise ValueError(f"no bundled schema {schema_id!r}") from None
    return json.loads(resources.files("fracturelab").joinpath("data", name).read_text(encoding="utf-8"))


def _options(kind) -> str:
    return ", ".join(f'"{m.value}"' for m in kind)


SYSTEM_PROMPT = f"""You are an experienced radiologist reviewing chest X-ray reports for bone fractures.

Read the report and classify it into exactly one class:
- "fracture": the report mentions or describes a fracture, current or old.
- "normal": the report explicitly states that there is no fracture or no traumatic bone change.
- "other": the report says nothing about fractures.

If the class is "fracture", also extract:
- location: every fractured site, a list drawn from {_options(Location)}.
- side: one of {_options(Side)}; use "both" for bilateral findings.
- stage: one of {_options(Stage)}; "acute" for new or recent fractures, "healed" for old, chronic or remote ones.
- implants: orthopedic hardware mentioned with the fracture, a list drawn from {_options(Implant)}.
For "normal" and "other" reports use location [], side "none", stage "other" and implants [].

Cite the exact sentence or phrase from the report that supports your class in "quote", copied verbatim.
Use an empty quote only for class "other".

Respond with a single JSON object following schema {SCHEMA_ID}:
{{"class": ..., "location": [...], "side": ..., "stage": ..., "implants": [...], "quote": ...}}
No markdown, no commentary."""


@dataclass(frozen=True)
class AnnotationRequest:
    study_id: str
    system: str
    user: str
    schema_id: str = SCHEMA_ID

    def messages(self) -> list[dict[str, str]]:
        return [{"role": "system", "content": self.system}, {"role": "user", "content": self.user}]


def build_request(record: ReportRecord) -> AnnotationRequest:
    user = f"Radiology report (study {record.study_id}):\n\n{record.text}"
    return AnnotationRequest(record.study_id, SYSTEM_PROMPT, user, SCHEMA_ID)


_FENCE_RE = re.compile(r"^\s*```(?:json)?\s*(.*?)\s*```\s*$", re.DOTALL)


def _normalize_payload(payload: dict) -> dict:
    out = dict(payload)
    for key in ("class", "side", "stage"):
        if isinstance(out.get(key), str):
            out[key] = " ".join(out[key].split()).casefold()
    for key in ("location", "implants"):
        if isinstance(out.get(key), list):
            out[key] = [" ".join(v.split()).casefold() if isinstance(v, str) else v for v in out[key]]
    return out


def validate_response(raw: str, source: ReportRecord, schema_id: str = SCHEMA_ID) -> FractureFinding:
    """Turn a raw model response into a finding, or raise.

    Raises :class:`SchemaViolation` for anything malformed and
    :class:`QuoteNotFound` when the quote is not a verbatim substring of
    the report.
    """
    fenced = _FENCE_RE.match(raw or "")
    body = fenced.group(1) if fenced else (raw or "")
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"response is not JSON: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise SchemaViolation("response is not a JSON object")
    payload = _normalize_payload(payload)
    try:
        jsonschema.validate(payload, load_schema(schema_id))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"{path}: {exc.message}") from None

    try:
        tri = parse_enum(TriClass, payload["class"])
        finding_kwargs = dict(
            locations={parse_enum(Location, v) for v in payload["location"]},
            side=parse_enum(Side, payload["side"]),
            stage=parse_enum(Stage, payload["stage"]),
            implants={parse_enum(Implant, v) for v in payload["implants"]},
        )
    except UnknownToken as exc:
        raise SchemaViolation(str(exc)) from None

    quote = payload["quote"]
    if tri is not TriClass.OTHER and not quote.strip():
        raise SchemaViolation(f"class {tri.value!r} requires a supporting quote")
    if quote and quote not in source.text:
        raise QuoteNotFound(quote)
    try:
        return FractureFinding(tri, evidence=quote, **finding_kwargs)
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from None


@dataclass(frozen=True)
class AnnotationResponse:
    """One raw response with its validation outcome.

    ``parsed`` is set iff ``raw`` validated; otherwise ``error_kind`` is
    "schema" or "quote" and ``error`` holds the reason.
    """

    study_id: str
    raw: str
    parsed: FractureFinding | None
    quote: str = ""
    error_kind: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.parsed is not None


def annotate(raw: str, source: ReportRecord) -> AnnotationResponse:
    """Validate ``raw`` against ``source`` without raising."""
    try:
        finding = validate_response(raw, source)
    except SchemaViolation as exc:
        return AnnotationResponse(source.study_id, raw, None, error_kind="schema", error=exc.detail)
    except QuoteNotFound as exc:
        return AnnotationResponse(source.study_id, raw, None, error_kind="quote", error=str(exc))
    return AnnotationResponse(source.study_id, raw, finding, quote=finding.evidence)


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff on transient transport failures only."""

    max_attempts: int = 5
    base_delay: float = 1.0
    factor: float = 2.0
    max_workers: int = 8
    sleep: Callable[[float], None] = field(default=time.sleep, compare=False, repr=False)

    def delay(self, attempt: int) -> float:
        """Wait before retry number ``attempt`` (1-based)."""
        return self.base_delay * self.factor ** (attempt - 1)


@dataclass(frozen=True)
class Failure:
    study_id: str
    kind: str  # "schema", "quote", "transport" or "missing"
    reason: str
    attempts: int = 1


@dataclass(frozen=True)
class BatchResult:
    corpus: LabeledCorpus
    failures: list[Failure]
    attempts: dict[str, int]
    responses: dict[str, AnnotationResponse] = field(default_factory=dict)


Transport = Callable[[AnnotationRequest], str]


@dataclass(frozen=True)
class _Outcome:
    record: ReportRecord
    raw: str | None
    attempts: int
    error: str | None = None


def _dispatch(record: ReportRecord, transport: Transport, policy: RetryPolicy) -> _Outcome:
    request = build_request(record)
    attempt = 0
    while True:
        attempt += 1
        try:
            return _Outcome(record, transport(request), attempt)
        except TransientTransportError as exc:
            if attempt >= policy.max_attempts:
                return _Outcome(record, None, attempt, f"gave up after {attempt} attempts: {exc}")
            delay = policy.delay(attempt)
            logger.info("study %s: transient failure (%s), retrying in %.1fs", record.study_id, exc, delay)
            policy.sleep(delay)
        except Exception as exc:  # permanent: do not retry
            return _Outcome(record, None, attempt, f"{type(exc).__name__}: {exc}")


def _record(response: AnnotationResponse, attempts: int, entries: dict, failures: list) -> None:
    if response.ok:
        entries[response.study_id] = response.parsed
    else:
        failures.append(Failure(response.study_id, response.error_kind, response.error or "", attempts))


def run_batch(corpus: Sequence[ReportRecord], transport: Transport,
              policy: RetryPolicy | None = None) -> BatchResult:
    """Annotate every record through ``transport`` under ``policy``.

    Validation failures are logged in the result, never raised. Raises
    :class:`BatchAborted` only when every request failed at the transport
    level.
    """
    policy = policy or RetryPolicy()
    if len({r.study_id for r in corpus}) != len(corpus):
        raise ValueError("run_batch requires unique study ids")
    with ThreadPoolExecutor(max_workers=max(1, policy.max_workers)) as pool:
        outcomes = list(pool.map(lambda r: _dispatch(r, transport, policy), corpus))

    entries: dict[str, FractureFinding] = {}
    failures: list[Failure] = []
    attempts: dict[str, int] = {}
    responses: dict[str, AnnotationResponse] = {}
    for out in sorted(outcomes, key=lambda o: o.record.study_id):
        sid = out.record.study_id
        attempts[sid] = out.attempts
        if out.raw is None:
            failures.append(Failure(sid, "transport", out.error or "", out.attempts))
            continue
        responses[sid] = annotate(out.raw, out.record)
        _record(responses[sid], out.attempts, entries, failures)
    if corpus and all(f.kind == "transport" for f in failures) and len(failures) == len(corpus):
        raise BatchAborted(f"all {len(corpus)} requests failed: {failures[0].reason}")
    return BatchResult(LabeledCorpus(entries, Provenance.LLM), failures, attempts, responses)


def collect(corpus: Sequence[ReportRecord], responses: Iterable[tuple[str, str]]) -> BatchResult:
    """Validate responses gathered offline, e.g. from a batch-API output file.

    Duplicate responses for a study are resolved last-write-wins with a
    warning; records with no response are reported as failures.
    """
    records = {r.study_id: r for r in corpus}
    latest: dict[str, str] = {}
    for sid, raw in responses:
        if sid not in records:
            logger.warning("response for unknown study %r ignored", sid)
            continue
        if sid in latest:
            logger.warning("duplicate response for study %r; keeping the last one", sid)
        latest[sid] = raw
    entries: dict[str, FractureFinding] = {}
    failures: list[Failure] = []
    responses: dict[str, AnnotationResponse] = {}
    for sid in sorted(records):
        if sid not in latest:
            failures.append(Failure(sid, "missing", "no response", 0))
            continue
        responses[sid] = annotate(latest[sid], records[sid])
        _record(responses[sid], 1, entries, failures)
    return BatchResult(LabeledCorpus(entries, Provenance.LLM), failures, {sid: 1 for sid in latest}, responses)


def aggregate_to_csv(corpus: LabeledCorpus, path: str | Path) -> None:
    from .corpus_io import write_labels

    write_labels(corpus, path)


class HttpTransport:
    """Chat-completions style HTTP transport configured from the environment."""

    RETRY_STATUS = frozenset({408, 409, 429, 500, 502, 503, 504})

    def __init__(self, endpoint: str, key: str | None, model: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.key = key
        self.model = model
        self.timeout = timeout

    @classmethod
    def from_env(cls, environ=os.environ) -> HttpTransport:
        missing = [v for v in (ENV_ENDPOINT, ENV_MODEL) if not environ.get(v)]
        if missing:
            raise RuntimeError(f"missing environment variables: {', '.join(missing)}")
        return cls(environ[ENV_ENDPOINT], environ.get(ENV_KEY), environ[ENV_MODEL])

    def body(self, request: AnnotationRequest) -> dict:
        return {
            "model": self.model,
            "temperature": 0,
            "messages": request.messages(),
            "response_format": {
                "type": "json_schema",
                "json_schema": {"name": "fracture_annotation", "schema": load_schema(request.schema_id)},
            },
        }

    def __call__(self, request: AnnotationRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.key:
            headers["Authorization"] = f"Bearer {self.key}"
        req = urllib.request.Request(
            self.endpoint, data=json.dumps(self.body(request)).encode("utf-8"), headers=headers, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                data = json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            if exc.code in self.RETRY_STATUS:
                raise TransientTransportError(f"HTTP {exc.code}") from exc
            raise
        except (urllib.error.URLError, TimeoutError) as exc:
            raise TransientTransportError(str(exc)) from exc
        return data["choices"][0]["message"]["content"]
