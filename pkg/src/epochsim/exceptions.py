"""Exception hierarchy shared across the simulator."""

from __future__ import annotations

from enum import Enum


class ErrorKind(str, Enum):
    NULL_VALUE = "NullValue"
    NOT_DEPLOYED = "NotDeployed"
    UNKNOWN_METHOD = "UnknownMethod"
    BAD_ARGUMENT = "BadArgument"
    DEPTH_EXCEEDED = "DepthExceeded"


class ContractException(Exception):
    """Fault raised while a contract executes.

    Contract code cannot catch these; any instance aborts the whole call tree
    of the transaction. ``origin`` is the id of the contract whose code was
    running when the fault happened. It is filled in by the runtime when the
    fault is raised from a value operation that has no notion of a contract.
    """

    def __init__(self, kind: ErrorKind, message: str = "", origin: str | None = None):
        self.kind = ErrorKind(kind)
        self.message = message
        self.origin = origin
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f" in {self.origin}" if self.origin else ""
        return f"{self.kind.value}{where}: {self.message}" if self.message else f"{self.kind.value}{where}"

    @property
    def reason(self) -> str:
        return str(self)


class NullValueError(ContractException):
    def __init__(self, message: str = "arithmetic or comparison on null", origin: str | None = None):
        super().__init__(ErrorKind.NULL_VALUE, message, origin)


class DatasetError(ValueError):
    """Malformed dataset file or row. ``row`` is 1-based, header is row 1."""

    def __init__(self, message: str, row: int | None = None, path=None):
        self.row = row
        self.path = path
        loc = ""
        if path is not None:
            loc += f"{path}: "
        if row is not None:
            loc += f"row {row}: "
        super().__init__(loc + message)


class InjectionError(DatasetError):
    pass


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; the run cannot be trusted."""
