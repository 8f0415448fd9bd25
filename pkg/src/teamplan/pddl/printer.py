"""Canonical text output for domains, problems and plans."""

from __future__ import annotations

from .model import (
    ROOT_TYPE,
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
    Plan,
    Problem,
    TypedName,
    format_number,
)


def _typed(names: tuple[TypedName, ...]) -> str:
    """Group consecutive names sharing a type: ``a b - t c - u``."""
    parts: list[str] = []
    i = 0
    while i < len(names):
        j = i
        while j < len(names) and names[j].type == names[i].type:
            j += 1
        group = " ".join(n.name for n in names[i:j])
        if names[i].type == ROOT_TYPE and j == len(names):
            parts.append(group)
        else:
            parts.append(f"{group} - {names[i].type}")
        i = j
    return " ".join(parts)


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, FluentRef):
        return str(expr)
    if isinstance(expr, Neg):
        return f"(- {format_expr(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({expr.op} {format_expr(expr.lhs)} {format_expr(expr.rhs)})"
    raise TypeError(f"not an expression: {expr!r}")


def format_condition(cond: Condition) -> str:
    if isinstance(cond, Literal):
        return str(cond.atom) if cond.positive else f"(not {cond.atom})"
    if isinstance(cond, Comparison):
        return f"({cond.op} {format_expr(cond.lhs)} {format_expr(cond.rhs)})"
    raise TypeError(f"not a condition: {cond!r}")


def _conjunction(parts: list[str], indent: str) -> str:
    if not parts:
        return "(and)"
    if len(parts) == 1:
        return f"(and {parts[0]})"
    sep = "\n" + indent + "     "
    return "(and " + sep.join(parts) + ")"


def _format_action(a: ActionSchema) -> str:
    pre = [format_condition(c) for c in a.precondition]
    eff = [str(x) for x in a.add]
    eff += [f"(not {x})" for x in a.delete]
    eff += [f"({e.op} {e.target} {format_expr(e.value)})" for e in a.numeric]
    return (f"  (:action {a.name}\n"
            f"    :parameters ({_typed(a.parameters)})\n"
            f"    :precondition {_conjunction(pre, '      ')}\n"
            f"    :effect {_conjunction(eff, '      ')})")


def print_domain(d: Domain) -> str:
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append(f"  (:requirements {' '.join(d.requirements)})")
    if d.types:
        lines.append(f"  (:types {_typed(d.types)})")
    if d.constants:
        lines.append(f"  (:constants {_typed(d.constants)})")
    if d.predicates:
        lines.append("  (:predicates")
        lines += [f"    ({' '.join([p.name, _typed(p.parameters)]).strip()})"
                  for p in d.predicates]
        lines[-1] += ")"
    if d.functions:
        lines.append("  (:functions")
        lines += [f"    ({' '.join([f.name, _typed(f.parameters)]).strip()})"
                  for f in d.functions]
        lines[-1] += ")"
    lines += [_format_action(a) for a in d.actions]
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def _format_atom(atom: Atom) -> str:
    return str(atom)


def print_problem(p: Problem) -> str:
    lines = [f"(define (problem {p.name})", f"  (:domain {p.domain_name})"]
    if p.objects:
        lines.append(f"  (:objects {_typed(p.objects)})")
    init = [_format_atom(a) for a in p.init_atoms]
    init += [f"(= {ref} {format_number(v)})" for ref, v in p.init_fluents]
    if init:
        lines.append("  (:init")
        lines += [f"    {x}" for x in init]
        lines[-1] += ")"
    else:
        lines.append("  (:init)")
    goal = [format_condition(c) for c in p.goal]
    lines.append(f"  (:goal {_conjunction(goal, '         ')}))")
    return "\n".join(lines) + "\n"


def format_timestamp(t: float) -> str:
    return f"{t:.1f}" if float(t).is_integer() else repr(float(t))


def print_plan(plan: Plan) -> str:
    return "".join(f"{format_timestamp(s.time)}: {s.text}\n" for s in plan.steps)
