"""Requests to problem generators and the diagnostics fed back to them."""

from __future__ import annotations

from dataclasses import dataclass, field

KINDS = ("syntax", "semantic", "plan-failure", "goal-miss")


@dataclass(frozen=True)
class Message:
    text: str
    line: int | None = None
    col: int | None = None
    token: str | None = None

    def render(self) -> str:
        where = f"line {self.line}, column {self.col}: " if self.line is not None else ""
        return where + self.text

    def to_dict(self) -> dict:
        return {"text": self.text, "line": self.line, "col": self.col, "token": self.token}


@dataclass(frozen=True)
class Diagnostics:
    """Outcome of one check; an empty instance means the check passed."""
    kind: str | None = None
    messages: tuple[Message, ...] = ()

    def __post_init__(self):
        if (self.kind is None) != (not self.messages):
            raise ValueError("diagnostics need a kind exactly when they carry messages")
        if self.kind is not None and self.kind not in KINDS:
            raise ValueError(f"unknown diagnostic kind {self.kind!r}")

    @property
    def ok(self) -> bool:
        return self.kind is None

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return f"{self.kind}: " + "; ".join(m.render() for m in self.messages)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "messages": [m.to_dict() for m in self.messages]}

    @classmethod
    def fail(cls, kind: str, text: str, **where) -> "Diagnostics":
        return cls(kind, (Message(text, **where),))


@dataclass(frozen=True)
class GeneratorRequest:
    command: str
    context: str
    domain_text: str
    feedback: tuple[Diagnostics, ...] = field(default=())

    @property
    def round(self) -> int:
        return len(self.feedback) + 1

    def with_feedback(self, diag: Diagnostics) -> "GeneratorRequest":
        return GeneratorRequest(self.command, self.context, self.domain_text,
                                (*self.feedback, diag))
