"""Exception hierarchy shared by every stage of the toolkit.

Parsing and elaboration raise subclasses of :class:`SourceError`, which carry
enough location information to print a caret diagnostic.  Everything else is a
plain :class:`SvaportError` subclass with a descriptive message.
"""

from __future__ import annotations


class SvaportError(Exception):
    """Base class for all toolkit errors."""


class SourceError(SvaportError):
    """An error tied to a position in an input text."""

    def __init__(self, message: str, line: int = 0, col: int = 0, excerpt: str = ""):
        self.line = line
        self.col = col
        self.excerpt = excerpt
        super().__init__(message)

    def __str__(self) -> str:  # pragma: no cover - formatting only
        base = super().__str__()
        if not self.line:
            return base
        out = f"{base} (line {self.line}, col {self.col})"
        if self.excerpt:
            out += "\n  " + self.excerpt + "\n  " + " " * (self.col - 1) + "^"
        return out


class ParseError(SourceError):
    """Input text does not match the accepted grammar (carries location and
    the token the parser expected)."""


class UnsupportedConstructError(SourceError):
    """Input is valid SystemVerilog but uses a construct outside the frozen
    subset (repetition operators, sequence composition, multiple clocks...)."""


class ElaborationError(SourceError):
    """Structurally valid text that does not elaborate: unknown identifiers,
    width mismatches, multiple drivers, malformed reset shapes."""


class CombinationalLoopError(ElaborationError):
    """A cycle through continuous assignments (not broken by a register)."""

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("combinational loop through: " + " -> ".join(self.cycle))


class UnknownSignalError(SvaportError):
    """An identifier does not resolve against the design it is used with."""


class ConfigError(SvaportError):
    """A configuration or map file is malformed or references unknown names."""


class InsufficientSignalsError(SvaportError):
    """The trojan generator cannot collect enough distinct trigger bits."""


class PayloadConflictError(SvaportError):
    """A trojan payload targets a net that cannot legally be rewritten."""


class ActivationNotFoundError(SvaportError):
    """No stimulus satisfying the activation objective was found in budget."""

    def __init__(self, message: str, tried: int = 0):
        self.tried = tried
        super().__init__(message)


class DomainError(SvaportError):
    """A metric was called outside its mathematical domain."""


class ConeTooLargeError(SvaportError):
    """Exhaustive enumeration was requested over too many input bits."""
