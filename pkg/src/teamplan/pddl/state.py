"""Ground states, ground actions and the transition function."""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import ArityMismatch, MissingFluent, NotApplicable, SemanticError, UnknownAction
from .model import (
    ActionSchema,
    Atom,
    BinOp,
    Comparison,
    Condition,
    Domain,
    Expr,
    FluentRef,
    Literal,
    Neg,
    Num,
    Number,
    NumericEffect,
    PlanStep,
    Problem,
    ROOT_TYPE,
)
from .printer import format_condition

GroundAtom = tuple[str, ...]
FLOAT_TOLERANCE = 1e-9

_CMP = {
    ">=": operator.ge, ">": operator.gt, "=": operator.eq,
    "<=": operator.le, "<": operator.lt,
}


class State:
    """Immutable truth assignment plus fluent store."""

    __slots__ = ("atoms", "fluents", "_hash")

    def __init__(self, atoms: Iterable[GroundAtom] = (),
                 fluents: Mapping[GroundAtom, Number] | None = None):
        self.atoms = frozenset(atoms)
        self.fluents = MappingProxyType(dict(fluents or {}))
        self._hash = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return self.atoms == other.atoms and dict(self.fluents) == dict(other.fluents)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.atoms, frozenset(self.fluents.items())))
        return self._hash

    def key(self) -> tuple:
        """Canonical sorted form, used for duplicate detection and output."""
        return (tuple(sorted(self.atoms)), tuple(sorted(self.fluents.items())))

    def holds(self, atom: GroundAtom) -> bool:
        return atom in self.atoms

    def value(self, term: GroundAtom) -> Number:
        try:
            return self.fluents[term]
        except KeyError:
            raise MissingFluent(term) from None

    def __repr__(self) -> str:
        return f"State(atoms={len(self.atoms)}, fluents={len(self.fluents)})"


def initial_state(problem: Problem) -> State:
    return State((a.key() for a in problem.init_atoms),
                 {ref.key(): v for ref, v in problem.init_fluents})


# ── expressions ──────────────────────────────────────────────────────────────

def evaluate(expr: Expr, fluents: Mapping[GroundAtom, Number]) -> Number:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, FluentRef):
        try:
            return fluents[expr.key()]
        except KeyError:
            raise MissingFluent(expr.key()) from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, fluents)
    lhs = evaluate(expr.lhs, fluents)
    rhs = evaluate(expr.rhs, fluents)
    if expr.op == "+":
        return lhs + rhs
    if expr.op == "-":
        return lhs - rhs
    if expr.op == "*":
        return lhs * rhs
    if rhs == 0:
        raise SemanticError(f"division by zero in ({expr.op} ...)")
    if isinstance(lhs, float) or isinstance(rhs, float):
        return lhs / rhs
    result = Fraction(lhs) / rhs
    return result.numerator if result.denominator == 1 else result


def compare(op: str, lhs: Number, rhs: Number) -> bool:
    if isinstance(lhs, float) or isinstance(rhs, float):
        diff = float(lhs) - float(rhs)
        close = math.isclose(lhs, rhs, rel_tol=0.0, abs_tol=FLOAT_TOLERANCE)
        return {
            ">=": diff >= 0 or close, ">": diff > 0 and not close, "=": close,
            "<=": diff <= 0 or close, "<": diff < 0 and not close,
        }[op]
    return _CMP[op](lhs, rhs)


def holds(cond: Condition, state: State) -> bool:
    """Truth of a ground literal or comparison in ``state``."""
    if isinstance(cond, Literal):
        return (cond.atom.key() in state.atoms) == cond.positive
    return compare(cond.op, evaluate(cond.lhs, state.fluents),
                   evaluate(cond.rhs, state.fluents))


def expr_terms(expr: Expr) -> Iterable[GroundAtom]:
    if isinstance(expr, FluentRef):
        yield expr.key()
    elif isinstance(expr, BinOp):
        yield from expr_terms(expr.lhs)
        yield from expr_terms(expr.rhs)
    elif isinstance(expr, Neg):
        yield from expr_terms(expr.operand)


def substitute(expr: Expr, binding: Mapping[str, str]) -> Expr:
    if isinstance(expr, Num):
        return expr
    if isinstance(expr, FluentRef):
        return FluentRef(expr.name, tuple(binding.get(a, a) for a in expr.args))
    if isinstance(expr, Neg):
        return Neg(substitute(expr.operand, binding))
    return BinOp(expr.op, substitute(expr.lhs, binding), substitute(expr.rhs, binding))


# ── ground actions ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: frozenset[GroundAtom]
    pre_neg: frozenset[GroundAtom]
    comparisons: tuple[Comparison, ...]
    add: frozenset[GroundAtom]
    delete: frozenset[GroundAtom]
    updates: tuple[NumericEffect, ...]

    @property
    def text(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"

    @property
    def label(self) -> str:
        return " ".join((self.name, *self.args))

    @property
    def read_atoms(self) -> frozenset[GroundAtom]:
        return self.pre_pos | self.pre_neg

    @property
    def written_atoms(self) -> frozenset[GroundAtom]:
        return self.add | self.delete

    @property
    def read_fluents(self) -> frozenset[GroundAtom]:
        terms = set()
        for c in self.comparisons:
            terms.update(expr_terms(c.lhs))
            terms.update(expr_terms(c.rhs))
        for u in self.updates:
            terms.update(expr_terms(u.value))
            if u.op != "assign":
                terms.add(u.target.key())
        return frozenset(terms)

    @property
    def written_fluents(self) -> frozenset[GroundAtom]:
        return frozenset(u.target.key() for u in self.updates)

    def __str__(self) -> str:
        return self.text


def ground(schema: ActionSchema, args: tuple[str, ...]) -> GroundAction:
    """Bind ``schema`` parameters to ``args`` (no type checking)."""
    if len(args) != schema.arity:
        raise ArityMismatch(f"action '{schema.name}' expects {schema.arity} arguments, "
                            f"got {len(args)}", schema.name)
    binding = {p.name: a for p, a in zip(schema.parameters, args)}

    def atom(a: Atom) -> GroundAtom:
        return (a.predicate, *(binding.get(x, x) for x in a.args))

    pos, neg, cmps = [], [], []
    for cond in schema.precondition:
        if isinstance(cond, Literal):
            (pos if cond.positive else neg).append(atom(cond.atom))
        else:
            cmps.append(Comparison(cond.op, substitute(cond.lhs, binding),
                                   substitute(cond.rhs, binding)))
    updates = tuple(
        NumericEffect(e.op, substitute(e.target, binding), substitute(e.value, binding))
        for e in schema.numeric)
    return GroundAction(
        name=schema.name,
        args=tuple(args),
        pre_pos=frozenset(pos),
        pre_neg=frozenset(neg),
        comparisons=tuple(cmps),
        add=frozenset(atom(a) for a in schema.add),
        delete=frozenset(atom(a) for a in schema.delete),
        updates=updates,
    )


def object_table(domain: Domain, problem: Problem) -> dict[str, str]:
    table = {c.name: c.type for c in domain.constants}
    table.update(problem.object_types)
    return table


def ground_step(domain: Domain, problem: Problem, step: PlanStep | tuple) -> GroundAction:
    """Ground a plan step (or ``(name, args)``), type-checking its arguments."""
    name, args = (step.name, step.args) if isinstance(step, PlanStep) else step
    schema = domain.action_map.get(name)
    if schema is None:
        raise UnknownAction(f"unknown action '{name}'", name)
    if len(args) != schema.arity:
        raise ArityMismatch(f"action '{name}' expects {schema.arity} arguments, "
                            f"got {len(args)}", name)
    objects = object_table(domain, problem)
    for arg, param in zip(args, schema.parameters):
        if arg not in objects:
            raise SemanticError(f"unknown object '{arg}'", arg)
        if not domain.is_subtype(objects[arg], param.type):
            raise SemanticError(f"object '{arg}' does not fit {param.name} - {param.type}",
                                arg)
    return ground(schema, tuple(args))


def objects_of_type(domain: Domain, problem: Problem, type_name: str) -> list[str]:
    return [o for o, t in object_table(domain, problem).items()
            if type_name == ROOT_TYPE or domain.is_subtype(t, type_name)]


def ground_all(domain: Domain, problem: Problem, schema: ActionSchema):
    """Every type-correct argument tuple of ``schema``, grounded, in sorted order."""
    pools = [sorted(objects_of_type(domain, problem, p.type)) for p in schema.parameters]
    for args in itertools.product(*pools):
        yield ground(schema, args)


# ── transition function ──────────────────────────────────────────────────────

def unmet_precondition(state: State, a: GroundAction) -> str | None:
    """First violated precondition of ``a`` as text, or None if applicable."""
    for atom in sorted(a.pre_pos):
        if atom not in state.atoms:
            return f"({' '.join(atom)}) is false"
    for atom in sorted(a.pre_neg):
        if atom in state.atoms:
            return f"(not ({' '.join(atom)})) is false"
    for c in a.comparisons:
        if not holds(c, state):
            return f"{format_condition(c)} is false"
    return None


def applicable(state: State, a: GroundAction) -> bool:
    if not a.pre_pos <= state.atoms or not a.pre_neg.isdisjoint(state.atoms):
        return False
    return all(holds(c, state) for c in a.comparisons)


def apply(state: State, a: GroundAction) -> State:
    """Successor state; deletes before adds, numeric updates read pre-state values."""
    reason = unmet_precondition(state, a)
    if reason is not None:
        raise NotApplicable(a.text, reason)
    return apply_unchecked(state, a)


def apply_unchecked(state: State, a: GroundAction) -> State:
    atoms = (state.atoms - a.delete) | a.add
    if not a.updates:
        return State(atoms, state.fluents)
    pre = state.fluents
    fluents = dict(pre)
    for eff in a.updates:
        key = eff.target.key()
        amount = evaluate(eff.value, pre)
        if eff.op == "assign":
            fluents[key] = amount
            continue
        if key not in pre:
            raise MissingFluent(key)
        delta = amount if eff.op == "increase" else -amount
        fluents[key] = fluents[key] + delta
    return State(atoms, fluents)
