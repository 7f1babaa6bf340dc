"""Exception hierarchy shared across the federation stack.

Every error that can cross the wire carries a stable ``code`` string; the
HTTP service layer and the CLI map codes to status codes and exit codes
from the tables at the bottom of this module.
"""

from __future__ import annotations


class FederationError(Exception):
    """Base class for all errors raised by this package."""

    code = "InternalError"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


# --- catalog -----------------------------------------------------------------

class MalformedSpec(FederationError):
    code = "MalformedSpec"


class DuplicateName(FederationError):
    code = "DuplicateName"


class DanglingRelationship(FederationError):
    code = "DanglingRelationship"


class DuplicateSourceId(FederationError):
    code = "DuplicateSourceId"


class UnresolvableRef(FederationError):
    code = "UnresolvableRef"


class LogicalNameCollision(FederationError):
    code = "LogicalNameCollision"


# --- SQL front end -----------------------------------------------------------

class SqlSyntaxError(FederationError):
    """Syntax error with a 1-based character offset into the query text."""

    code = "SyntaxError"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnsupportedFeature(FederationError):
    code = "UnsupportedFeature"

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


class UnknownTable(FederationError):
    code = "UnknownTable"


class UnknownColumn(FederationError):
    code = "UnknownColumn"


class AmbiguousColumn(FederationError):
    code = "AmbiguousColumn"


class TypeMismatch(FederationError):
    code = "TypeMismatch"


# --- planner / executor ------------------------------------------------------

class CrossProductRejected(FederationError):
    code = "CrossProductRejected"


class ResultTooLarge(FederationError):
    code = "ResultTooLarge"


class BackendUnavailable(FederationError):
    code = "BackendUnavailable"

    def __init__(self, target: str, message: str = ""):
        super().__init__(message or f"backend unavailable: {target}")
        self.target = target


class MalformedFixture(FederationError):
    code = "MalformedFixture"


# --- remote calls ------------------------------------------------------------

class RemoteError(FederationError):
    """A peer answered with a wire error; ``remote_code`` is the peer's code."""

    code = "RemoteError"

    def __init__(self, remote_code: str, url: str, message: str = ""):
        super().__init__(f"{remote_code} from {url}: {message}")
        self.remote_code = remote_code
        self.url = url

    @property
    def wire_message(self) -> str:
        return self.message


class RemoteTimeout(FederationError):
    code = "RemoteTimeout"


class DecodeError(FederationError):
    code = "DecodeError"


# --- RLS ---------------------------------------------------------------------

class MalformedUrl(FederationError):
    code = "MalformedUrl"


# --- ETL ---------------------------------------------------------------------

class MalformedStage(FederationError):
    code = "MalformedStage"


class StageWriteFailed(FederationError):
    code = "StageWriteFailed"


class MalformedJob(FederationError):
    code = "MalformedJob"


# --- services / tools ----------------------------------------------------------

class AddressInUse(FederationError):
    code = "AddressInUse"


class ServerShutdown(FederationError):
    code = "Shutdown"


class ScenarioUnavailable(FederationError):
    code = "ScenarioUnavailable"


class MalformedRequest(FederationError):
    code = "MalformedRequest"


_CODE_TO_CLASS = {
    cls.code: cls
    for cls in [
        MalformedSpec, DuplicateName, DanglingRelationship, DuplicateSourceId,
        UnresolvableRef, LogicalNameCollision, SqlSyntaxError, UnsupportedFeature,
        UnknownTable, UnknownColumn, AmbiguousColumn, TypeMismatch,
        CrossProductRejected, ResultTooLarge, BackendUnavailable, MalformedFixture,
        RemoteError, RemoteTimeout, DecodeError, MalformedUrl, MalformedStage,
        StageWriteFailed, MalformedJob, AddressInUse, ServerShutdown,
        ScenarioUnavailable, MalformedRequest,
    ]
}

# HTTP status per wire code: 400 for client-side query/spec problems, 502 when
# a peer failed, 503 when a backing store is down or the server is draining.
_HTTP_STATUS = {
    "BackendUnavailable": 503,
    "Shutdown": 503,
    "RemoteError": 502,
    "RemoteTimeout": 502,
    "DecodeError": 502,
    "InternalError": 500,
}

# CLI exit code families (0 = success, 2 = usage, click's convention).
_EXIT_FAMILY = {
    3: {"SyntaxError", "UnsupportedFeature", "UnknownTable", "UnknownColumn",
        "TypeMismatch", "AmbiguousColumn", "CrossProductRejected", "ResultTooLarge"},
    4: {"MalformedSpec", "DuplicateName", "DanglingRelationship", "DuplicateSourceId",
        "UnresolvableRef", "LogicalNameCollision", "MalformedUrl", "MalformedJob"},
    5: {"BackendUnavailable", "MalformedFixture", "MalformedStage", "StageWriteFailed"},
    6: {"RemoteError", "RemoteTimeout", "DecodeError", "MalformedRequest"},
    7: {"ScenarioUnavailable", "AddressInUse", "Shutdown"},
}


def http_status_for(code: str) -> int:
    return _HTTP_STATUS.get(code, 400)


def exit_code_for(exc: FederationError) -> int:
    codes = [exc.code]
    if isinstance(exc, RemoteError):
        # classify by the peer's diagnosis; transport family only as fallback
        codes.insert(0, exc.remote_code)
    for code in codes:
        for exit_code, family in _EXIT_FAMILY.items():
            if code in family:
                return exit_code
    return 1


def class_for_code(code: str):
    """Exception class registered for a wire code, or None."""
    return _CODE_TO_CLASS.get(code)
