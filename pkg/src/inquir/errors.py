"""Exception types shared across the toolchain."""

from __future__ import annotations

__all__ = [
    "InquirError",
    "ParseError",
    "DuplicateProcessHeader",
    "UnsupportedGate",
    "CapacityExceeded",
    "DisconnectedTopology",
    "ConfigMismatch",
    "IllegalChoice",
    "EvalError",
    "NotStuck",
    "AlreadyAllocated",
    "UnknownQubit",
    "ArityMismatch",
    "DimensionMismatch",
    "ForcedOutcomeImpossible",
    "ScriptExhausted",
    "StuckDuringSimulation",
    "SchemaError",
]


class InquirError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(InquirError):
    """Syntax error with a source location and the token set that was expected.

    Attributes:
        line: 1-based source line.
        col: 1-based source column.
        expected: sorted tuple of token descriptions that would have been legal.
        found: description of the token actually present.
    """

    def __init__(self, line: int, col: int, expected, found: str, filename: str = "<input>"):
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        self.found = found
        self.filename = filename
        want = ", ".join(self.expected)
        super().__init__(f"{filename}:{line}:{col}: expected {want}, found {found}")


class DuplicateProcessHeader(InquirError):
    """Two process blocks declare the same participant id."""

    def __init__(self, participant: int, line: int):
        self.participant = participant
        self.line = line
        super().__init__(f"line {line}: duplicate process header for participant {participant}")


class UnsupportedGate(InquirError):
    """Gate name outside the supported set (parser, frontend or backend)."""


class CapacityExceeded(InquirError):
    """Circuit does not fit the target architecture's data-qubit capacity."""


class DisconnectedTopology(InquirError):
    """No path between two processors that must exchange entanglement."""


class ConfigMismatch(InquirError):
    """Program references participants or resources absent from the architecture."""


class IllegalChoice(InquirError):
    """A transition was requested that is not currently enabled."""


class EvalError(InquirError):
    """Runtime expression fault: unbound variable or value of the wrong kind."""


class NotStuck(InquirError):
    """classify_stuck was called on a state that is not stuck."""


class AlreadyAllocated(InquirError):
    """Backend asked to allocate a qubit id it already tracks."""


class UnknownQubit(InquirError):
    """Backend asked to operate on a qubit id it does not track."""


class ArityMismatch(InquirError):
    """Gate applied to the wrong number of qubits or parameters."""


class DimensionMismatch(InquirError):
    """Reference state has the wrong dimension for a fidelity check."""


class ForcedOutcomeImpossible(InquirError):
    """A scripted measurement outcome has probability (numerically) zero."""


class ScriptExhausted(InquirError):
    """A Scripted outcome oracle ran out of bits."""


class StuckDuringSimulation(InquirError):
    """The cost simulator blocked before completing the program."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class SchemaError(InquirError):
    """Malformed configuration or data file (architecture, cost model, CSV)."""
