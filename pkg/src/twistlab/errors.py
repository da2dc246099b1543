"""Exception hierarchy shared by the library and the CLI error envelope."""

from __future__ import annotations


class TwistlabError(Exception):
    """Base class. ``code`` is the machine-readable name used by the CLI."""

    code = "TwistlabError"

    def __init__(self, message: str, clause: str | None = None):
        super().__init__(message)
        self.message = message
        self.clause = clause

    def envelope(self) -> dict:
        return {"code": self.code, "message": self.message, "clause": self.clause}


class ResourceLimitExceeded(TwistlabError):
    code = "ResourceLimitExceeded"


class SingularCurve(TwistlabError):
    code = "SingularCurve"


class NotMinimal(TwistlabError):
    code = "NotMinimal"


class AdditivePrimeEncountered(TwistlabError):
    code = "AdditivePrimeEncountered"


class HypothesisViolated(TwistlabError):
    code = "HypothesisViolated"


class BadPrime(TwistlabError):
    code = "BadPrime"


class PoolExhausted(TwistlabError):
    code = "PoolExhausted"


class InsufficientData(TwistlabError):
    code = "InsufficientData"


class NotFound(TwistlabError):
    code = "NotFound"


class NetworkError(TwistlabError):
    code = "NetworkError"


class CacheCorrupt(TwistlabError):
    code = "CacheCorrupt"
