"""Immutable AST for domains, problems and plans.

Numbers are kept exact: integers stay ``int`` and decimal literals become
``fractions.Fraction``. Equality of two ASTs ignores source positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Union

Number = Union[int, Fraction]

ROOT_TYPE = "object"
COMPARATORS = (">=", ">", "=", "<=", "<")
ARITHMETIC = ("+", "-", "*", "/")
UPDATES = ("increase", "decrease", "assign")


def to_number(text: str) -> Number:
    """Parse a numeric literal exactly; raises ValueError on junk."""
    value = Fraction(text)
    return value.numerator if value.denominator == 1 else value


def format_number(value: Number | float) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        den = value.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den == 1:
            digits = max(twos, fives)
            scaled = value * 10**digits
            sign = "-" if scaled < 0 else ""
            whole, frac = divmod(abs(scaled.numerator), 10**digits)
            return f"{sign}{whole}.{frac:0{digits}d}"
        return repr(float(value))
    return repr(float(value))


@dataclass(frozen=True)
class TypedName:
    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[str, ...] = ()

    def key(self) -> tuple[str, ...]:
        return (self.predicate, *self.args)

    def __str__(self) -> str:
        return "(" + " ".join(self.key()) + ")"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True


@dataclass(frozen=True)
class Num:
    value: Number


@dataclass(frozen=True)
class FluentRef:
    name: str
    args: tuple[str, ...] = ()

    def key(self) -> tuple[str, ...]:
        return (self.name, *self.args)

    def __str__(self) -> str:
        return "(" + " ".join(self.key()) + ")"


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


Expr = Union[Num, FluentRef, BinOp, Neg]


@dataclass(frozen=True)
class Comparison:
    op: str
    lhs: Expr
    rhs: Expr


Condition = Union[Literal, Comparison]


@dataclass(frozen=True)
class NumericEffect:
    op: str
    target: FluentRef
    value: Expr


@dataclass(frozen=True)
class Signature:
    name: str
    parameters: tuple[TypedName, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[TypedName, ...]
    precondition: tuple[Condition, ...]
    add: tuple[Atom, ...] = ()
    delete: tuple[Atom, ...] = ()
    numeric: tuple[NumericEffect, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...]
    types: tuple[TypedName, ...]
    constants: tuple[TypedName, ...]
    predicates: tuple[Signature, ...]
    functions: tuple[Signature, ...]
    actions: tuple[ActionSchema, ...]

    @cached_property
    def type_parent(self) -> dict[str, str]:
        return {t.name: t.type for t in self.types}

    @cached_property
    def predicate_map(self) -> dict[str, Signature]:
        return {p.name: p for p in self.predicates}

    @cached_property
    def function_map(self) -> dict[str, Signature]:
        return {f.name: f for f in self.functions}

    @cached_property
    def action_map(self) -> dict[str, ActionSchema]:
        return {a.name: a for a in self.actions}

    def is_subtype(self, sub: str, sup: str) -> bool:
        seen = set()
        while sub not in seen:
            if sub == sup:
                return True
            seen.add(sub)
            if sub == ROOT_TYPE:
                return False
            sub = self.type_parent.get(sub, ROOT_TYPE)
        return False

    def has_type(self, name: str) -> bool:
        return name == ROOT_TYPE or name in self.type_parent


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[TypedName, ...]
    init_atoms: tuple[Atom, ...]
    init_fluents: tuple[tuple[FluentRef, Number], ...]
    goal: tuple[Condition, ...]

    @cached_property
    def object_types(self) -> dict[str, str]:
        return {o.name: o.type for o in self.objects}


@dataclass(frozen=True)
class PlanStep:
    time: float
    name: str
    args: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"

    @property
    def label(self) -> str:
        return " ".join((self.name, *self.args))


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i: int) -> PlanStep:
        return self.steps[i]
