"""Exception hierarchy for the PDDL toolchain."""

from __future__ import annotations


class PDDLError(Exception):
    """Base class for every error raised while reading or simulating PDDL."""


class PDDLSyntaxError(PDDLError):
    """Malformed text. Carries a 1-based line/column and the expected tokens."""

    def __init__(self, message: str, line: int = 0, col: int = 0,
                 expected: tuple[str, ...] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        where = f"{line}:{col}: " if line else ""
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}{message}{hint}")


class UnknownRequirement(PDDLSyntaxError):
    pass


class SemanticError(PDDLError):
    """Well-formed text that contradicts the domain declarations."""

    def __init__(self, message: str, token: str | None = None,
                 line: int = 0, col: int = 0):
        self.message = message
        self.token = token
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class UnknownAction(SemanticError):
    pass


class ArityMismatch(SemanticError):
    pass


class MissingFluent(PDDLError):
    def __init__(self, term: tuple[str, ...]):
        self.term = term
        super().__init__(f"fluent ({' '.join(term)}) has no value")


class NotApplicable(PDDLError):
    def __init__(self, action: str, reason: str):
        self.action = action
        self.reason = reason
        super().__init__(f"{action} is not applicable: {reason}")
