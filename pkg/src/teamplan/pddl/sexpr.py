"""S-expression reader with source positions.

Identifiers are case-folded to lower case at read time. Comments start with
``;`` and run to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PDDLSyntaxError

_TOKEN_RE = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


@dataclass(frozen=True)
class Sym:
    text: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple["Node", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)
    end_col: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)

    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Sym):
            return self.items[0].text
        return None


Node = Sym | SList


def _positions(text: str):
    line, col = 1, 1
    pos = 0
    for m in _TOKEN_RE.finditer(text):
        if m.start() != pos:  # pragma: no cover - regex covers every char
            raise PDDLSyntaxError("unreadable character", line, col)
        tok = m.group(0)
        yield tok, line, col
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()


def read_all(text: str) -> list[Node]:
    """Read every top-level expression in ``text``."""
    stack: list[tuple[list[Node], int, int]] = []
    top: list[Node] = []
    for tok, line, col in _positions(text):
        if tok.isspace() or tok.startswith(";"):
            continue
        if tok == "(":
            stack.append(([], line, col))
        elif tok == ")":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", line, col)
            items, l0, c0 = stack.pop()
            node = SList(tuple(items), l0, c0, line, col)
            (stack[-1][0] if stack else top).append(node)
        else:
            sym = Sym(tok.lower(), line, col)
            (stack[-1][0] if stack else top).append(sym)
    if stack:
        _, l0, c0 = stack[-1]
        raise PDDLSyntaxError(f"'(' opened at {l0}:{c0} is never closed",
                              l0, c0, expected=(")",))
    return top


def read_one(text: str) -> SList:
    nodes = read_all(text)
    if not nodes:
        raise PDDLSyntaxError("empty input", 1, 1, expected=("(",))
    if len(nodes) > 1:
        extra = nodes[1]
        raise PDDLSyntaxError("trailing text after the top-level expression",
                              extra.line, extra.col, expected=("end of input",))
    if not isinstance(nodes[0], SList):
        raise PDDLSyntaxError(f"unexpected '{nodes[0].text}'",
                              nodes[0].line, nodes[0].col, expected=("(",))
    return nodes[0]
