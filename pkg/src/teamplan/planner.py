"""Greedy best-first team-level planner for the supported PDDL subset.

Actions are grounded up front. Predicates and functions that no action ever
writes are static: preconditions over them are decided once against the
initial state (pruning impossible groundings) and static fluent terms are
folded into constants, so ``(value-of magnitude6)`` becomes ``6``.
"""

from __future__ import annotations

import heapq
import itertools
import math
import operator
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .pddl.errors import PDDLError
from .pddl.model import (
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
    PlanStep,
    Problem,
)
from .pddl.state import (
    GroundAction,
    State,
    compare,
    evaluate,
    ground_all,
    holds,
    initial_state,
)


class PlanningError(Exception):
    pass


class Unsolvable(PlanningError):
    """The reachable state space was exhausted without meeting the goal."""


class SearchBudgetExceeded(PlanningError):
    """Expansion or wall-clock budget ran out before a plan was found."""


@dataclass(frozen=True)
class SearchConfig:
    max_expansions: int = 200_000
    heuristic: str = "goal-count"
    tie_break: str = "fifo"
    timeout: float = 30.0

    def __post_init__(self):
        if self.max_expansions <= 0:
            raise ValueError("max_expansions must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.heuristic not in ("goal-count", "blind"):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.tie_break != "fifo":
            raise ValueError(f"unknown tie-break {self.tie_break!r}")


# ── heuristic ────────────────────────────────────────────────────────────────

def _residual(op: str, lhs, rhs) -> float:
    diff = lhs - rhs
    if op in (">=", ">"):
        return max(0, -diff)
    if op in ("<=", "<"):
        return max(0, diff)
    return abs(diff)


def numeric_bucket(cond: Comparison, fluents: Mapping, step: float | None) -> int:
    """Unsatisfied numeric conjuncts cost ceil(residual / step), at least 1."""
    lhs = evaluate(cond.lhs, fluents)
    rhs = evaluate(cond.rhs, fluents)
    if compare(cond.op, lhs, rhs):
        return 0
    if not step:
        return 1
    return max(1, math.ceil(_residual(cond.op, lhs, rhs) / step))


def heuristic_value(state: State, goal: Sequence[Condition],
                    step: float | Mapping | None = None) -> int:
    """Goal-count: unsatisfied literals count 1, numeric conjuncts by residual bucket.

    ``step`` is the largest change a single action can make to the compared
    quantity, either one number or a map from fluent term to its own step.
    Zero exactly when every conjunct holds.
    """
    h = 0
    for cond in goal:
        if isinstance(cond, Literal):
            h += 0 if holds(cond, state) else 1
            continue
        try:
            if isinstance(step, Mapping):
                terms = [t for e in (cond.lhs, cond.rhs) for t in _terms(e)]
                steps = [step.get(t) for t in terms]
                s = None if not steps or None in steps else max(steps)
            else:
                s = step
            h += numeric_bucket(cond, state.fluents, s)
        except PDDLError:
            h += 1
    return h


def _terms(expr: Expr):
    if isinstance(expr, FluentRef):
        yield expr.key()
    elif isinstance(expr, BinOp):
        yield from _terms(expr.lhs)
        yield from _terms(expr.rhs)
    elif isinstance(expr, Neg):
        yield from _terms(expr.operand)


# ── compilation ──────────────────────────────────────────────────────────────

class _Missing(Exception):
    pass


_OPS = {">=": operator.ge, ">": operator.gt, "=": operator.eq,
        "<=": operator.le, "<": operator.lt}
_FLIP = {">=": "<=", ">": "<", "=": "=", "<=": ">=", "<": ">"}


def _fold(expr: Expr, static: Mapping) -> Expr:
    """Replace static fluent terms by their values and fold constants."""
    if isinstance(expr, FluentRef):
        key = expr.key()
        return Num(static[key]) if key in static else expr
    if isinstance(expr, Neg):
        inner = _fold(expr.operand, static)
        return Num(-inner.value) if isinstance(inner, Num) else Neg(inner)
    if isinstance(expr, BinOp):
        lhs, rhs = _fold(expr.lhs, static), _fold(expr.rhs, static)
        if isinstance(lhs, Num) and isinstance(rhs, Num):
            try:
                return Num(evaluate(BinOp(expr.op, lhs, rhs), {}))
            except PDDLError:
                pass
        return BinOp(expr.op, lhs, rhs)
    return expr


def _compile(expr: Expr, index: Mapping) -> Callable:
    if isinstance(expr, Num):
        value = expr.value
        return lambda vals: value
    if isinstance(expr, FluentRef):
        key = expr.key()
        if key not in index:
            def missing(vals):
                raise _Missing(key)
            return missing
        i = index[key]

        def lookup(vals):
            v = vals[i]
            if v is None:
                raise _Missing(key)
            return v
        return lookup
    if isinstance(expr, Neg):
        f = _compile(expr.operand, index)
        return lambda vals: -f(vals)
    lhs, rhs = _compile(expr.lhs, index), _compile(expr.rhs, index)
    op = expr.op
    return lambda vals: evaluate(BinOp(op, Num(lhs(vals)), Num(rhs(vals))), {})


@dataclass
class _Op:
    action: GroundAction
    pre_pos: frozenset
    pre_neg: frozenset
    tests: tuple  # (lhs_fn, op, rhs_fn)
    add: frozenset
    delete: frozenset
    updates: tuple  # (index, op, value_fn)
    simple: tuple = ()  # (index, cmp, constant) for term-vs-constant tests
    deltas: tuple | None = None  # (index, signed constant) when every update is one


class GroundTask:
    """Grounded, statically simplified search problem."""

    def __init__(self, domain: Domain, problem: Problem):
        self.domain = domain
        self.problem = problem
        init = initial_state(problem)
        written_preds = {a[0] for s in domain.actions for a in
                         [x.key() for x in (*s.add, *s.delete)]}
        written_funcs = {e.target.name for s in domain.actions for e in s.numeric}
        self.static_atoms = {a for a in init.atoms if a[0] not in written_preds}
        self.static_preds = {p.name for p in domain.predicates} - written_preds
        static_fluents = {k: v for k, v in init.fluents.items() if k[0] not in written_funcs}
        dynamic = sorted(k for k in init.fluents if k[0] in written_funcs)
        self.ops: list[_Op] = []
        written_terms: set = set()
        grounded = []
        for schema in domain.actions:
            for ga in ground_all(domain, problem, schema):
                grounded.append(ga)
                written_terms.update(ga.written_fluents)
        for t in sorted(written_terms - set(dynamic) - set(static_fluents)):
            dynamic.append(t)
        self.terms = tuple(dynamic)
        self.index = {t: i for i, t in enumerate(self.terms)}
        # with no floats anywhere, arithmetic stays exact and plain operators
        # agree with the tolerant comparison
        self.exact = not any(isinstance(v, float) for v in init.fluents.values())
        for ga in grounded:
            op = self._simplify(ga, static_fluents)
            if op is not None:
                self.ops.append(op)
        self.init_atoms = frozenset(init.atoms - self.static_atoms)
        self.init_vals = tuple(init.fluents.get(t) for t in self.terms)
        self.static_fluents = static_fluents
        self.step = self._max_steps()

    def _simplify(self, ga: GroundAction, static_fluents) -> _Op | None:
        for atom in ga.pre_pos:
            if atom[0] in self.static_preds and atom not in self.static_atoms:
                return None
        for atom in ga.pre_neg:
            if atom[0] in self.static_preds and atom in self.static_atoms:
                return None
        tests, simple = [], []
        for c in ga.comparisons:
            lhs, rhs = _fold(c.lhs, static_fluents), _fold(c.rhs, static_fluents)
            if isinstance(lhs, Num) and isinstance(rhs, Num):
                if not compare(c.op, lhs.value, rhs.value):
                    return None
                continue
            fast = self._simple_test(c.op, lhs, rhs)
            if fast is not None:
                simple.append(fast)
                continue
            tests.append((_compile(lhs, self.index), c.op, _compile(rhs, self.index)))
        updates = []
        for u in ga.updates:
            key = u.target.key()
            if key not in self.index:
                return None
            updates.append((self.index[key], u.op,
                            _compile(_fold(u.value, static_fluents), self.index),
                            _fold(u.value, static_fluents)))
        return _Op(
            action=ga,
            pre_pos=frozenset(a for a in ga.pre_pos if a[0] not in self.static_preds),
            pre_neg=frozenset(a for a in ga.pre_neg if a[0] not in self.static_preds),
            tests=tuple(tests),
            add=ga.add,
            delete=ga.delete,
            updates=tuple(updates),
            simple=tuple(simple),
            deltas=self._deltas(updates),
        )

    def _deltas(self, updates) -> tuple | None:
        if not self.exact:
            return None
        out = []
        for i, kind, _fn, folded in updates:
            if kind == "assign" or not isinstance(folded, Num) or isinstance(folded.value, float):
                return None
            out.append((i, folded.value if kind == "increase" else -folded.value))
        return tuple(out)

    def _simple_test(self, op: str, lhs: Expr, rhs: Expr):
        if not self.exact:
            return None
        if isinstance(lhs, Num) and isinstance(rhs, FluentRef):
            lhs, rhs, op = rhs, lhs, _FLIP[op]
        if not (isinstance(lhs, FluentRef) and isinstance(rhs, Num)):
            return None
        if lhs.key() not in self.index or isinstance(rhs.value, float):
            return None
        return (self.index[lhs.key()], _OPS[op], rhs.value)

    def _max_steps(self) -> dict:
        """Largest constant change any action makes to each fluent term."""
        step: dict = {}
        unknown: set = set()
        for op in self.ops:
            for i, kind, _fn, folded in op.updates:
                term = self.terms[i]
                if kind == "assign" or not isinstance(folded, Num):
                    unknown.add(term)
                    continue
                step[term] = max(step.get(term, 0), abs(folded.value))
        for t in unknown:
            step[t] = None
        return step

    def applicable(self, op: _Op, atoms: frozenset, vals: tuple) -> bool:
        for i, cmp, k in op.simple:
            v = vals[i]
            if v is None or not cmp(v, k):
                return False
        if not op.pre_pos <= atoms or not op.pre_neg.isdisjoint(atoms):
            return False
        try:
            for lhs, cmp, rhs in op.tests:
                if not compare(cmp, lhs(vals), rhs(vals)):
                    return False
        except _Missing:
            return False
        return True

    def successor(self, op: _Op, atoms: frozenset, vals: tuple):
        new_atoms = (atoms - op.delete) | op.add if (op.add or op.delete) else atoms
        if not op.updates:
            return new_atoms, vals
        out = list(vals)
        if op.deltas is not None:
            for i, d in op.deltas:
                out[i] += d
            return new_atoms, tuple(out)
        for i, kind, fn, _ in op.updates:
            amount = fn(vals)
            if kind == "assign":
                out[i] = amount
            elif kind == "increase":
                out[i] = out[i] + amount
            else:
                out[i] = out[i] - amount
        return new_atoms, tuple(out)

    def goal_counter(self, goal: Sequence[Condition]) -> Callable[[frozenset, tuple], int]:
        """Compiled ``heuristic_value`` over the compact (atoms, values) state."""
        const, literals, numeric = 0, [], []
        for cond in goal:
            if isinstance(cond, Literal):
                key = cond.atom.key()
                if key[0] in self.static_preds:
                    const += 0 if (key in self.static_atoms) == cond.positive else 1
                else:
                    literals.append((key, cond.positive))
                continue
            terms = [t for e in (cond.lhs, cond.rhs) for t in _terms(e)]
            steps = [self.step.get(t) for t in terms]
            step = None if not steps or None in steps else max(steps)
            lhs = _compile(_fold(cond.lhs, self.static_fluents), self.index)
            rhs = _compile(_fold(cond.rhs, self.static_fluents), self.index)
            numeric.append((lhs, cond.op, rhs, step))

        def count(atoms: frozenset, vals: tuple) -> int:
            h = const
            for key, positive in literals:
                if (key in atoms) != positive:
                    h += 1
            for lhs, op, rhs, step in numeric:
                try:
                    a, b = lhs(vals), rhs(vals)
                except (_Missing, PDDLError):
                    h += 1
                    continue
                if compare(op, a, b):
                    continue
                h += 1 if not step else max(1, math.ceil(_residual(op, a, b) / step))
            return h
        return count

    def to_state(self, atoms: frozenset, vals: tuple) -> State:
        fluents = dict(self.static_fluents)
        fluents.update((t, v) for t, v in zip(self.terms, vals) if v is not None)
        return State(atoms | self.static_atoms, fluents)


# ── search ───────────────────────────────────────────────────────────────────

def plan(domain: Domain, problem: Problem, config: SearchConfig | None = None) -> Plan:
    """Find a plan by greedy best-first search; deterministic for a fixed config.

    Raises Unsolvable when the reachable space is exhausted and
    SearchBudgetExceeded when the expansion or time budget runs out.
    """
    config = config or SearchConfig()
    started = time.monotonic()
    task = GroundTask(domain, problem)
    goal = problem.goal

    count = task.goal_counter(goal)
    if config.heuristic == "blind":
        def h(atoms, vals) -> int:
            return 0 if count(atoms, vals) == 0 else 1
    else:
        h = count

    start = (task.init_atoms, task.init_vals)
    h0 = h(*start)
    if h0 == 0:
        return Plan(())
    parents: dict = {start: None}
    counter = itertools.count()
    frontier = [(h0, next(counter), start)]
    expansions = 0
    ops, successor = task.ops, task.successor
    while frontier:
        _, _, node = heapq.heappop(frontier)
        expansions += 1
        if expansions > config.max_expansions:
            raise SearchBudgetExceeded(f"expansion budget {config.max_expansions} exhausted")
        if expansions % 256 == 0 and time.monotonic() - started > config.timeout:
            raise SearchBudgetExceeded(f"timeout after {config.timeout:g}s")
        atoms, vals = node
        for k, op in enumerate(ops):
            ok = True
            for i, cmp, bound in op.simple:
                v = vals[i]
                if v is None or not cmp(v, bound):
                    ok = False
                    break
            if not ok or ((op.pre_pos or op.pre_neg or op.tests)
                          and not task.applicable(op, atoms, vals)):
                continue
            child = successor(op, atoms, vals)
            if child in parents:
                continue
            parents[child] = (node, k)
            hc = h(*child)
            if hc == 0:
                return _extract(task, parents, child)
            heapq.heappush(frontier, (hc, next(counter), child))
    raise Unsolvable("reachable state space exhausted without reaching the goal")


def _extract(task: GroundTask, parents: dict, node) -> Plan:
    ops = []
    while parents[node] is not None:
        node, k = parents[node]
        ops.append(task.ops[k].action)
    ops.reverse()
    return Plan(tuple(PlanStep(float(i), a.name, a.args) for i, a in enumerate(ops)))
