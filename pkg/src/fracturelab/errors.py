"""Exception types shared across the package."""

from __future__ import annotations


class FractureLabError(Exception):
    """Base class for all errors raised by fracturelab."""


class UnknownToken(FractureLabError, ValueError):
    def __init__(self, kind: str, token: str, line: int | None = None):
        self.kind = kind
        self.token = token
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown {kind} token {token!r}{where}")


class InvalidFinding(FractureLabError, ValueError):
    pass


class DuplicateStudyId(FractureLabError, ValueError):
    def __init__(self, study_id: str, line: int | None = None):
        self.study_id = study_id
        self.line = line
        where = f" on line {line}" if line is not None else ""
        super().__init__(f"duplicate study_id {study_id!r}{where}")


class ParseError(FractureLabError, ValueError):
    def __init__(self, line: int | None, reason: str):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class MissingPrediction(FractureLabError, KeyError):
    def __init__(self, study_id: str):
        self.study_id = study_id
        super().__init__(f"no prediction for study {study_id!r}")

    def __str__(self) -> str:
        return self.args[0]


class EmptyEvaluation(FractureLabError, ValueError):
    pass


class UndefinedAUC(FractureLabError, ValueError):
    pass


class MissingScore(FractureLabError, ValueError):
    pass


class MemberKeyMismatch(FractureLabError, ValueError):
    pass


class SchemaViolation(FractureLabError, ValueError):
    def __init__(self, detail: str):
        self.detail = detail
        super().__init__(f"schema violation: {detail}")


class QuoteNotFound(FractureLabError, ValueError):
    def __init__(self, quote: str):
        self.quote = quote
        super().__init__(f"quoted snippet not found in report: {quote!r}")


class TransientTransportError(FractureLabError):
    """A transport failure worth retrying (timeouts, rate limits, 5xx)."""


class BatchAborted(FractureLabError, RuntimeError):
    pass
