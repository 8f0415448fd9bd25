"""Recursive-descent reader for the supported PDDL subset.

Supported: ``:strips``, ``:typing``, ``:fluents`` (alias ``:numeric-fluents``)
and ``:negative-preconditions``. Anything else (durative actions, conditional
or quantified effects, disjunctive preconditions) is rejected with a
positioned diagnostic.
"""

from __future__ import annotations

import re

from .errors import (
    ArityMismatch,
    PDDLSyntaxError,
    SemanticError,
    UnknownAction,
    UnknownRequirement,
)
from .model import (
    ARITHMETIC,
    COMPARATORS,
    ROOT_TYPE,
    UPDATES,
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
    NumericEffect,
    Plan,
    PlanStep,
    Problem,
    Signature,
    TypedName,
    to_number,
)
from .sexpr import Node, SList, Sym, read_one

SUPPORTED_REQUIREMENTS = frozenset({
    ":strips", ":typing", ":fluents", ":numeric-fluents", ":negative-preconditions",
})
_UNSUPPORTED_HEADS = {
    "or": "disjunctive conditions",
    "imply": "implications",
    "forall": "quantified formulas",
    "exists": "quantified formulas",
    "when": "conditional effects",
    "at": "timed literals",
    "over": "durative conditions",
}


def _fail(node: Node | None, message: str, expected: tuple[str, ...] = ()):
    line = getattr(node, "line", 0)
    col = getattr(node, "col", 0)
    raise PDDLSyntaxError(message, line, col, expected)


def _expect_list(node: Node, what: str) -> SList:
    if not isinstance(node, SList):
        _fail(node, f"expected {what}, found '{node}'", ("(",))
    return node


def _expect_sym(node: Node, what: str) -> Sym:
    if not isinstance(node, Sym):
        _fail(node, f"expected {what}, found a parenthesised list", (what,))
    return node


def _typed_list(items, *, variables: bool) -> list[tuple[TypedName, Sym]]:
    """Parse ``a b - t c - u d`` into typed names (untyped default to object)."""
    out: list[tuple[TypedName, Sym]] = []
    pending: list[Sym] = []
    it = list(items)
    i = 0
    while i < len(it):
        node = _expect_sym(it[i], "a name")
        if node.text == "-":
            if not pending or i + 1 >= len(it):
                _fail(node, "dangling type separator '-'", ("name",))
            type_node = _expect_sym(it[i + 1], "a type name")
            out.extend((TypedName(p.text, type_node.text), p) for p in pending)
            pending = []
            i += 2
            continue
        if variables and not node.text.startswith("?"):
            _fail(node, f"expected a variable, found '{node.text}'", ("?variable",))
        if not variables and node.text.startswith("?"):
            _fail(node, f"unexpected variable '{node.text}'", ("name",))
        pending.append(node)
        i += 1
    out.extend((TypedName(p.text, ROOT_TYPE), p) for p in pending)
    return out


def _check_define(root: SList, kind: str) -> tuple[str, list[Node]]:
    if root.head() != "define":
        _fail(root[0] if len(root) else root, "expected 'define'", ("define",))
    if len(root) < 2:
        _fail(root, f"missing ({kind} <name>) header", (f"({kind}",))
    header = _expect_list(root[1], f"({kind} <name>)")
    if header.head() != kind or len(header) != 2:
        _fail(header, f"expected ({kind} <name>)", (f"({kind}",))
    return _expect_sym(header[1], f"{kind} name").text, list(root.items[2:])


# ── expressions and formulas ─────────────────────────────────────────────────

def parse_expr(node: Node) -> Expr:
    if isinstance(node, Sym):
        try:
            return Num(to_number(node.text))
        except (ValueError, ZeroDivisionError):
            _fail(node, f"expected a number or (function ...), found '{node.text}'",
                  ("number", "("))
    if not len(node):
        _fail(node, "empty numeric expression", ("number", "("))
    head = _expect_sym(node[0], "an operator or function name").text
    if head in ARITHMETIC:
        if head == "-" and len(node) == 2:
            return Neg(parse_expr(node[1]))
        if len(node) != 3:
            _fail(node, f"'{head}' takes two operands")
        return BinOp(head, parse_expr(node[1]), parse_expr(node[2]))
    args = tuple(_expect_sym(a, "a term").text for a in node.items[1:])
    return FluentRef(head, args)


def _parse_atom(node: SList) -> Atom:
    name = _expect_sym(node[0], "a predicate name").text
    return Atom(name, tuple(_expect_sym(a, "a term").text for a in node.items[1:]))


def parse_condition(node: Node) -> list[Condition]:
    """Flatten a conjunctive formula into literals and comparisons."""
    node = _expect_list(node, "a condition")
    if not len(node):
        return []
    head = node.head()
    if head is None:
        _fail(node, "condition must start with a name", ("and", "not", "predicate"))
    if head == "and":
        out: list[Condition] = []
        for part in node.items[1:]:
            out.extend(parse_condition(part))
        return out
    if head in _UNSUPPORTED_HEADS:
        _fail(node, f"unsupported construct '{head}' ({_UNSUPPORTED_HEADS[head]})")
    if head == "not":
        if len(node) != 2:
            _fail(node, "'not' takes exactly one atom")
        inner = _expect_list(node[1], "an atom")
        if inner.head() in COMPARATORS or inner.head() in _UNSUPPORTED_HEADS \
                or inner.head() in ("and", "not"):
            _fail(inner, "'not' may only wrap a plain atom")
        return [Literal(_parse_atom(inner), False)]
    if head in COMPARATORS:
        if len(node) != 3:
            _fail(node, f"comparison '{head}' takes two operands")
        return [Comparison(head, parse_expr(node[1]), parse_expr(node[2]))]
    return [Literal(_parse_atom(node), True)]


def parse_effect(node: Node) -> tuple[list[Atom], list[Atom], list[NumericEffect]]:
    node = _expect_list(node, "an effect")
    add: list[Atom] = []
    delete: list[Atom] = []
    numeric: list[NumericEffect] = []

    def walk(n: Node) -> None:
        n = _expect_list(n, "an effect")
        if not len(n):
            return
        head = n.head()
        if head == "and":
            for part in n.items[1:]:
                walk(part)
        elif head in _UNSUPPORTED_HEADS:
            _fail(n, f"unsupported construct '{head}' ({_UNSUPPORTED_HEADS[head]})")
        elif head == "not":
            if len(n) != 2:
                _fail(n, "'not' takes exactly one atom")
            delete.append(_parse_atom(_expect_list(n[1], "an atom")))
        elif head in UPDATES:
            if len(n) != 3:
                _fail(n, f"'{head}' takes a fluent and a value")
            target = parse_expr(n[1])
            if not isinstance(target, FluentRef):
                _fail(n[1], f"'{head}' must target a function term", ("(function",))
            numeric.append(NumericEffect(head, target, parse_expr(n[2])))
        elif head in ("scale-up", "scale-down"):
            _fail(n, f"unsupported numeric update '{head}'", UPDATES)
        elif head is None:
            _fail(n, "effect must start with a name")
        else:
            add.append(_parse_atom(n))

    walk(node)
    return add, delete, numeric


# ── domain ───────────────────────────────────────────────────────────────────

def _parse_signatures(items, what: str) -> list[tuple[Signature, SList]]:
    out = []
    skip_type = False
    for i, item in enumerate(items):
        if skip_type:
            skip_type = False
            continue
        if isinstance(item, Sym):
            # ``(:functions (f ?x) - number)`` style return types
            if item.text == "-" and i + 1 < len(items):
                skip_type = True
                continue
            _fail(item, f"expected a {what} declaration", ("(",))
        name = _expect_sym(item[0], f"a {what} name").text if len(item) else None
        if name is None:
            _fail(item, f"empty {what} declaration")
        params = tuple(t for t, _ in _typed_list(item.items[1:], variables=True))
        out.append((Signature(name, params), item))
    return out


def _parse_action(node: SList) -> ActionSchema:
    if len(node) < 2:
        _fail(node, "action needs a name", ("name",))
    name = _expect_sym(node[1], "an action name").text
    fields: dict[str, Node] = {}
    items = node.items[2:]
    if len(items) % 2:
        _fail(items[-1], f"action '{name}': keyword without value")
    for key, value in zip(items[::2], items[1::2]):
        key = _expect_sym(key, "an action keyword")
        if key.text not in (":parameters", ":precondition", ":effect"):
            _fail(key, f"unknown action keyword '{key.text}'",
                  (":parameters", ":precondition", ":effect"))
        if key.text in fields:
            _fail(key, f"duplicate '{key.text}' in action '{name}'")
        fields[key.text] = value
    if ":effect" not in fields:
        _fail(node, f"action '{name}' is missing its :effect clause", (":effect",))
    params = ()
    if ":parameters" in fields:
        plist = _expect_list(fields[":parameters"], "a parameter list")
        params = tuple(t for t, _ in _typed_list(plist.items, variables=True))
    pre = parse_condition(fields[":precondition"]) if ":precondition" in fields else []
    add, delete, numeric = parse_effect(fields[":effect"])
    return ActionSchema(name, params, tuple(pre), tuple(add), tuple(delete), tuple(numeric))


def parse_domain(text: str) -> Domain:
    """Parse domain text; raise PDDLSyntaxError / SemanticError on problems."""
    root = read_one(text)
    name, sections = _check_define(root, "domain")
    requirements: list[str] = []
    types: list[TypedName] = []
    constants: list[TypedName] = []
    predicates: list[tuple[Signature, SList]] = []
    functions: list[tuple[Signature, SList]] = []
    actions: list[tuple[ActionSchema, SList]] = []
    seen: set[str] = set()
    for sec in sections:
        sec = _expect_list(sec, "a domain section")
        key = sec.head()
        if key != ":action" and key in seen:
            _fail(sec, f"duplicate section '{key}'")
        seen.add(key)
        if key == ":requirements":
            for r in sec.items[1:]:
                r = _expect_sym(r, "a requirement flag")
                if r.text not in SUPPORTED_REQUIREMENTS:
                    raise UnknownRequirement(
                        f"unsupported requirement '{r.text}'", r.line, r.col,
                        tuple(sorted(SUPPORTED_REQUIREMENTS)))
                requirements.append(r.text)
        elif key == ":types":
            types = [t for t, _ in _typed_list(sec.items[1:], variables=False)]
        elif key == ":constants":
            constants = [t for t, _ in _typed_list(sec.items[1:], variables=False)]
        elif key == ":predicates":
            predicates = _parse_signatures(sec.items[1:], "predicate")
        elif key == ":functions":
            functions = _parse_signatures(sec.items[1:], "function")
        elif key == ":action":
            actions.append((_parse_action(sec), sec))
        elif key == ":durative-action":
            _fail(sec, "durative actions are not supported")
        else:
            _fail(sec, f"unknown domain section '{key}'",
                  (":requirements", ":types", ":constants", ":predicates",
                   ":functions", ":action"))
    domain = Domain(
        name=name,
        requirements=tuple(requirements),
        types=tuple(types),
        constants=tuple(constants),
        predicates=tuple(p for p, _ in predicates),
        functions=tuple(f for f, _ in functions),
        actions=tuple(a for a, _ in actions),
    )
    _check_domain(domain, predicates, functions, actions)
    return domain


def _check_domain(domain: Domain, predicates, functions, actions) -> None:
    def sem(node, msg, token=None):
        raise SemanticError(msg, token, getattr(node, "line", 0), getattr(node, "col", 0))

    names = [t.name for t in domain.types]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        sem(None, f"type declared twice: {sorted(dup)[0]}", sorted(dup)[0])
    for t in domain.types:
        if not domain.has_type(t.type):
            sem(None, f"type '{t.name}' has undeclared parent '{t.type}'", t.type)
        if domain.is_subtype(t.type, t.name) and t.name != ROOT_TYPE:
            sem(None, f"type hierarchy cycle through '{t.name}'", t.name)
    for kind, entries in (("predicate", predicates), ("function", functions),
                          ("action", actions)):
        seen: set[str] = set()
        for sig, node in entries:
            if sig.name in seen:
                sem(node, f"{kind} '{sig.name}' declared twice", sig.name)
            seen.add(sig.name)
            for p in sig.parameters:
                if not domain.has_type(p.type):
                    sem(node, f"{kind} '{sig.name}': undeclared type '{p.type}'", p.type)
    consts = {c.name for c in domain.constants}
    for c in domain.constants:
        if not domain.has_type(c.type):
            sem(None, f"constant '{c.name}' has undeclared type '{c.type}'", c.type)
    for schema, node in actions:
        params = [p.name for p in schema.parameters]
        if len(set(params)) != len(params):
            sem(node, f"action '{schema.name}' repeats a parameter name", schema.name)
        scope = dict((p.name, p.type) for p in schema.parameters)

        def check_term(term: str, ctx: str) -> None:
            if term.startswith("?"):
                if term not in scope:
                    sem(node, f"action '{schema.name}': free variable {term} in {ctx}", term)
            elif term not in consts:
                sem(node, f"action '{schema.name}': unknown constant '{term}' in {ctx}", term)

        for atom, ctx in _schema_atoms(schema):
            sig = domain.predicate_map.get(atom.predicate)
            if sig is None:
                sem(node, f"action '{schema.name}': undeclared predicate "
                          f"'{atom.predicate}'", atom.predicate)
            if sig.arity != len(atom.args):
                raise ArityMismatch(
                    f"action '{schema.name}': predicate '{atom.predicate}' expects "
                    f"{sig.arity} arguments, got {len(atom.args)}", atom.predicate,
                    node.line, node.col)
            for a in atom.args:
                check_term(a, ctx)
        for ref in _schema_fluents(schema):
            sig = domain.function_map.get(ref.name)
            if sig is None:
                sem(node, f"action '{schema.name}': undeclared function '{ref.name}'",
                    ref.name)
            if sig.arity != len(ref.args):
                raise ArityMismatch(
                    f"action '{schema.name}': function '{ref.name}' expects "
                    f"{sig.arity} arguments, got {len(ref.args)}", ref.name,
                    node.line, node.col)
            for a in ref.args:
                check_term(a, "numeric expression")


def _schema_atoms(schema: ActionSchema):
    for c in schema.precondition:
        if isinstance(c, Literal):
            yield c.atom, "precondition"
    for a in schema.add:
        yield a, "effect"
    for a in schema.delete:
        yield a, "effect"


def expr_fluents(expr: Expr):
    if isinstance(expr, FluentRef):
        yield expr
    elif isinstance(expr, BinOp):
        yield from expr_fluents(expr.lhs)
        yield from expr_fluents(expr.rhs)
    elif isinstance(expr, Neg):
        yield from expr_fluents(expr.operand)


def _schema_fluents(schema: ActionSchema):
    for c in schema.precondition:
        if isinstance(c, Comparison):
            yield from expr_fluents(c.lhs)
            yield from expr_fluents(c.rhs)
    for eff in schema.numeric:
        yield eff.target
        yield from expr_fluents(eff.value)


# ── problem ──────────────────────────────────────────────────────────────────

def parse_problem(text: str, domain: Domain) -> Problem:
    root = read_one(text)
    name, sections = _check_define(root, "problem")
    domain_name = None
    objects: list[tuple[TypedName, Sym]] = []
    init: list[SList] = []
    goal: list[Condition] = []
    goal_node: SList | None = None
    seen: set[str] = set()
    for sec in sections:
        sec = _expect_list(sec, "a problem section")
        key = sec.head()
        if key in seen:
            _fail(sec, f"duplicate section '{key}'")
        seen.add(key)
        if key == ":domain":
            if len(sec) != 2:
                _fail(sec, "expected (:domain <name>)")
            domain_name = _expect_sym(sec[1], "a domain name")
        elif key == ":objects":
            objects = _typed_list(sec.items[1:], variables=False)
        elif key == ":init":
            init = [_expect_list(n, "an initial fact") for n in sec.items[1:]]
        elif key == ":goal":
            if len(sec) != 2:
                _fail(sec, "expected exactly one goal formula")
            goal_node = _expect_list(sec[1], "a goal formula")
            goal = parse_condition(goal_node)
        else:
            _fail(sec, f"unknown problem section '{key}'",
                  (":domain", ":objects", ":init", ":goal"))
    if domain_name is None:
        _fail(root, "problem lacks a (:domain ...) section", ("(:domain",))
    if goal_node is None:
        _fail(root, "problem lacks a (:goal ...) section", ("(:goal",))
    if domain_name.text != domain.name:
        raise SemanticError(
            f"problem targets domain '{domain_name.text}', loaded domain is "
            f"'{domain.name}'", domain_name.text, domain_name.line, domain_name.col)

    obj_types: dict[str, str] = {c.name: c.type for c in domain.constants}
    for obj, node in objects:
        if not domain.has_type(obj.type):
            raise SemanticError(f"object '{obj.name}' has undeclared type '{obj.type}'",
                                obj.type, node.line, node.col)
        if obj.name in obj_types:
            raise SemanticError(f"object '{obj.name}' declared twice", obj.name,
                                node.line, node.col)
        obj_types[obj.name] = obj.type

    def check_args(sig: Signature, args: tuple[str, ...], node: Node, kind: str) -> None:
        if len(args) != sig.arity:
            raise ArityMismatch(f"{kind} '{sig.name}' expects {sig.arity} arguments, "
                                f"got {len(args)}", sig.name, node.line, node.col)
        for arg, param in zip(args, sig.parameters):
            if arg.startswith("?"):
                raise SemanticError(f"variable {arg} in a ground formula", arg,
                                    node.line, node.col)
            if arg not in obj_types:
                raise SemanticError(f"unknown object '{arg}'", arg, node.line, node.col)
            if not domain.is_subtype(obj_types[arg], param.type):
                raise SemanticError(
                    f"object '{arg}' of type '{obj_types[arg]}' does not fit parameter "
                    f"{param.name} - {param.type} of '{sig.name}'", arg, node.line, node.col)

    def check_fluent(ref: FluentRef, node: Node) -> None:
        sig = domain.function_map.get(ref.name)
        if sig is None:
            raise SemanticError(f"unknown function '{ref.name}'", ref.name,
                                node.line, node.col)
        check_args(sig, ref.args, node, "function")

    def check_atom(atom: Atom, node: Node) -> None:
        sig = domain.predicate_map.get(atom.predicate)
        if sig is None:
            raise SemanticError(f"unknown predicate '{atom.predicate}'", atom.predicate,
                                node.line, node.col)
        check_args(sig, atom.args, node, "predicate")

    init_atoms: list[Atom] = []
    init_fluents: list[tuple[FluentRef, object]] = []
    fluent_keys: set[tuple[str, ...]] = set()
    for fact in init:
        if fact.head() == "=":
            if len(fact) != 3:
                _fail(fact, "expected (= (function args) number)")
            ref = parse_expr(fact[1])
            value = parse_expr(fact[2])
            if not isinstance(ref, FluentRef):
                _fail(fact[1], "expected a function term", ("(",))
            if not isinstance(value, Num):
                _fail(fact[2], "initial fluent values must be numeric literals", ("number",))
            check_fluent(ref, fact)
            if ref.key() in fluent_keys:
                raise SemanticError(f"fluent {ref} initialised twice", ref.name,
                                    fact.line, fact.col)
            fluent_keys.add(ref.key())
            init_fluents.append((ref, value.value))
        elif fact.head() in ("not", "and") or fact.head() in _UNSUPPORTED_HEADS:
            _fail(fact, f"unsupported initial fact '{fact.head()}'", ("(predicate", "(="))
        elif fact.head() is None:
            _fail(fact, "initial fact must start with a name", ("(predicate", "(="))
        else:
            atom = _parse_atom(fact)
            check_atom(atom, fact)
            init_atoms.append(atom)

    for cond in goal:
        if isinstance(cond, Literal):
            check_atom(cond.atom, goal_node)
        else:
            for ref in (*expr_fluents(cond.lhs), *expr_fluents(cond.rhs)):
                check_fluent(ref, goal_node)

    return Problem(
        name=name,
        domain_name=domain_name.text,
        objects=tuple(o for o, _ in objects),
        init_atoms=tuple(init_atoms),
        init_fluents=tuple(init_fluents),
        goal=tuple(goal),
    )


# ── plan ─────────────────────────────────────────────────────────────────────

_PLAN_LINE = re.compile(
    r"^\s*(?P<t>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*:\s*"
    r"\((?P<body>[^()]*)\)\s*(?:\[[^\]]*\])?\s*$")


def parse_plan(text: str, domain: Domain, problem: Problem | None = None) -> Plan:
    """Parse ``<t>: (<name> <args>)`` lines. With ``problem``, arguments are type-checked."""
    steps: list[PlanStep] = []
    objects = None
    if problem is not None:
        objects = {c.name: c.type for c in domain.constants}
        objects.update(problem.object_types)
    last_time = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        if not line.strip():
            continue
        m = _PLAN_LINE.match(line)
        if m is None:
            raise PDDLSyntaxError("expected '<time>: (<action> <args>)'", lineno, 1,
                                  ("<time>: (action ...)",))
        col = m.start("body")
        words = m.group("body").lower().split()
        if not words:
            raise PDDLSyntaxError("empty action", lineno, col + 1, ("action name",))
        name, args = words[0], tuple(words[1:])
        schema = domain.action_map.get(name)
        if schema is None:
            raise UnknownAction(f"unknown action '{name}'", name, lineno, col + 1)
        if len(args) != schema.arity:
            raise ArityMismatch(f"action '{name}' expects {schema.arity} arguments, "
                                f"got {len(args)}", name, lineno, col + 1)
        if objects is not None:
            for arg, param in zip(args, schema.parameters):
                if arg not in objects:
                    raise SemanticError(f"unknown object '{arg}'", arg, lineno, col + 1)
                if not domain.is_subtype(objects[arg], param.type):
                    raise SemanticError(
                        f"object '{arg}' of type '{objects[arg]}' does not fit "
                        f"{param.name} - {param.type}", arg, lineno, col + 1)
        t = float(m.group("t"))
        if last_time is not None and t < last_time:
            raise PDDLSyntaxError("timestamps must be non-decreasing", lineno, 1)
        last_time = t
        steps.append(PlanStep(t, name, args))
    return Plan(tuple(steps))
