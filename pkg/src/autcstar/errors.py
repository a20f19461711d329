"""Exception types raised by the library.

Every domain error derives from :class:`AutcstarError` so the CLI can map
them to exit code 1 with a machine-readable payload.
"""

from __future__ import annotations


class AutcstarError(Exception):
    """Base class for domain errors."""

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class AutomatonError(AutcstarError, ValueError):
    """An automaton description violates one or more invariants.

    ``issues`` lists every violation found, not only the first one.
    """

    def __init__(self, message: str, issues: list[str] | None = None):
        super().__init__(message)
        self.issues = list(issues) if issues else [message]

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["issues"] = self.issues
        return d


class MalformedPermutation(AutomatonError):
    pass


class UnknownStateInSection(AutomatonError):
    pass


class EmptyAlphabet(AutomatonError):
    pass


class EmptyAutomaton(AutomatonError):
    pass


class MalformedSections(AutomatonError):
    pass


class UnknownGenerator(AutcstarError, ValueError):
    pass


class WordSyntaxError(AutcstarError, ValueError):
    pass


class LevelTooLarge(AutcstarError, ValueError):
    pass


class DenseCapExceeded(AutcstarError, ValueError):
    pass


class NotSelfAdjoint(AutcstarError, ValueError):
    pass


class NotNormal(AutcstarError, ValueError):
    pass


class NonConvergence(AutcstarError, RuntimeError):
    """Power iteration hit its iteration budget; ``estimate`` holds the best value."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class InconsistentSystem(AutcstarError, RuntimeError):
    pass


class NonUniqueLift(AutcstarError, ValueError):
    def __init__(self, message: str, witnesses):
        super().__init__(message)
        self.witnesses = witnesses


class NonCommutingInputs(AutcstarError, ValueError):
    pass


class UnsupportedAlphabet(AutcstarError, ValueError):
    pass


class DegenerateSplit(AutcstarError, RuntimeError):
    pass


class ExpressionSyntaxError(AutcstarError, ValueError):
    """Parse failure; ``position`` is a 0-based offset, ``line``/``column`` 1-based."""

    def __init__(self, message: str, text: str, position: int):
        line = text.count("\n", 0, position) + 1
        column = position - (text.rfind("\n", 0, position) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column} (position {position})")
        self.position = position
        self.line = line
        self.column = column

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update(position=self.position, line=self.line, column=self.column)
        return d
