"""Exception hierarchy shared by all modules.

Domain errors (bad group-theoretic data, unsupported classes) derive from
ForgeError so the CLI can map them uniformly to exit code 1.  Input-syntax
problems derive from ForgeParseError and map to exit code 2.
"""

from __future__ import annotations

from dataclasses import dataclass


class ForgeError(Exception):
    """Base class for domain errors."""

    code = "ForgeError"


class AlphabetMismatch(ForgeError):
    code = "AlphabetMismatch"


class MissingImage(ForgeError):
    code = "MissingImage"


class UnknownGenerator(ForgeError):
    code = "UnknownGenerator"


class NotInSubgroup(ForgeError):
    code = "NotInSubgroup"


class AlphabetCollision(ForgeError):
    code = "AlphabetCollision"


class StableLetterClash(ForgeError):
    code = "StableLetterClash"


class OracleFailure(ForgeError):
    code = "OracleFailure"


class InvalidIsoData(ForgeError):
    code = "InvalidIsoData"


class UnsupportedFactorClass(ForgeError):
    code = "UnsupportedFactorClass"


class UnsupportedClass(ForgeError):
    code = "UnsupportedClass"


class NotConnected(ForgeError):
    code = "NotConnected"


class InvalidGraphOfGroups(ForgeError):
    code = "InvalidGraphOfGroups"


class RadiusTooLarge(ForgeError):
    code = "RadiusTooLarge"


class InvalidIndex(ForgeError):
    code = "InvalidIndex"


class OutOfTruncationRange(ForgeError):
    code = "OutOfTruncationRange"


class InvalidTable(ForgeError):
    code = "InvalidTable"


@dataclass(frozen=True)
class SourceSpan:
    """Byte offsets (start, end) into an input text, start <= end."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span ({self.start}, {self.end})")


class ForgeParseError(Exception):
    """Syntax error in presentation/word text, with the offending span."""

    code = "ParseError"

    def __init__(self, span: SourceSpan, message: str):
        super().__init__(f"{message} at {span.start}..{span.end}")
        self.span = span
        self.message = message


# The spec-facing name; kept distinct from the builtin below module level.
ParseError = ForgeParseError
