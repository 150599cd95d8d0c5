"""Exception hierarchy shared by every module.

`code` mirrors the class name so the same identifier travels through
transaction receipts, the HTTP error body and the CLI unchanged.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all simulator errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# ledger
class ConfigError(DomainError):
    pass


class AuthError(DomainError):
    pass


class NonceError(DomainError):
    pass


# multisig
class ThresholdError(DomainError):
    pass


class OwnerError(DomainError):
    pass


class NotOwnerError(DomainError):
    pass


class AlreadyConfirmedError(DomainError):
    pass


class AlreadyExecutedError(DomainError):
    pass


class NotConfirmedError(DomainError):
    pass


class NotFoundError(DomainError):
    pass


# assets
class DuplicateAssetError(DomainError):
    pass


class TransitionError(DomainError):
    pass


class AnchorError(DomainError):
    pass


class ProvenanceError(DomainError):
    pass


# governance
class NotExecutedError(DomainError):
    pass


class DuplicateError(DomainError):
    pass


class PolicyMissingError(DomainError):
    pass


class PolicyError(DomainError):
    pass


# bridge
class BalanceError(DomainError):
    pass


class ReconcileError(DomainError):
    pass


class ActionKindError(DomainError):
    pass


# scenario runner
class ScenarioError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AssertionFailure(DomainError):
    def __init__(self, query: object, expected: object, actual: object):
        self.query = query
        self.expected = expected
        self.actual = actual
        super().__init__(f"assert failed for {query!r}: expected {expected!r}, got {actual!r}")


class ReplayDivergence(DomainError):
    def __init__(self, seq: int, message: str):
        self.seq = seq
        super().__init__(f"seq {seq}: {message}")


# api
class StartupError(DomainError):
    pass


_CODE_MAP = {cls.__name__: cls for cls in list(globals().values()) if isinstance(cls, type) and issubclass(cls, DomainError)}


def error_for_code(code: str, message: str) -> DomainError:
    """Rebuild a typed error from a (code, message) pair carried by a receipt."""
    cls = _CODE_MAP.get(code, DomainError)
    if cls in (ScenarioError, AssertionFailure, ReplayDivergence):
        return DomainError(message)
    return cls(message)
