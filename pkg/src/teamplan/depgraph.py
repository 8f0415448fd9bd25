"""Subtask dependency graphs built from sequential team plans.

Two plan steps are dependent when reordering them could change whether they
apply or what they produce. ``tree`` mode attaches each step to its nearest
dependent predecessor only (single parent); ``dag`` mode keeps an edge from
every dependent predecessor and is the mode the scheduler uses by default.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .pddl.model import Domain, Plan, PlanStep, Problem
from .pddl.printer import format_timestamp
from .pddl.state import GroundAction, ground_step
from .pddl.validate import validate_plan

ROOT = -1
MODES = ("dag", "tree")


class GraphError(Exception):
    pass


class InvalidPlan(GraphError):
    pass


class NotClosed(GraphError):
    pass


def depends(later: GroundAction, earlier: GroundAction, domain: Domain | None = None) -> bool:
    """True when ``later`` must stay after ``earlier``.

    Checked conflicts: an atom written by one step is read or written by the
    other, or a fluent written by one step is read or written by the other.
    """
    if earlier.written_atoms & later.read_atoms:
        return True
    if later.written_atoms & earlier.read_atoms:
        return True
    if earlier.written_atoms & later.written_atoms:
        return True
    ew, lw = earlier.written_fluents, later.written_fluents
    if ew & (later.read_fluents | lw):
        return True
    if lw & earlier.read_fluents:
        return True
    return False


@dataclass(frozen=True)
class GraphNode:
    index: int
    time: float
    name: str
    args: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"

    @property
    def step(self) -> PlanStep:
        return PlanStep(self.time, self.name, self.args)


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[int, int], ...]
    mode: str = "dag"

    @cached_property
    def _parents(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {n.index: [] for n in self.nodes}
        for p, c in self.edges:
            out[c].append(p)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    @cached_property
    def _children(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {ROOT: []}
        out.update({n.index: [] for n in self.nodes})
        for p, c in self.edges:
            out[p].append(c)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    def parents(self, v: int) -> tuple[int, ...]:
        return self._parents[v]

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def node(self, v: int) -> GraphNode:
        return self.nodes[v]

    def ancestors(self, v: int) -> set[int]:
        seen: set[int] = set()
        stack = [p for p in self.parents(v) if p != ROOT]
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(p for p in self.parents(u) if p != ROOT)
        return seen

    def descendants(self, v: int) -> set[int]:
        seen: set[int] = set()
        stack = list(self.children(v))
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self.children(u))
        return seen

    def depth(self) -> int:
        """Nodes on the longest root-to-leaf path (0 for an empty graph)."""
        best: dict[int, int] = {}
        for n in self.nodes:
            best[n.index] = 1 + max((best[p] for p in self.parents(n.index) if p != ROOT),
                                    default=0)
        return max(best.values(), default=0)


def build_graph(plan: Plan, domain: Domain, problem: Problem, mode: str = "dag") -> DependencyGraph:
    """Dependency graph of ``plan``; raises InvalidPlan if the plan does not validate."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    report = validate_plan(domain, problem, plan)
    if report.first_failure is not None:
        bad = report.steps[report.first_failure]
        raise InvalidPlan(f"step {bad.index} {bad.action}: {bad.reason}")
    actions = [ground_step(domain, problem, s) for s in plan.steps]
    return graph_from_actions(actions, [s.time for s in plan.steps], mode)


def graph_from_actions(actions: list[GroundAction], times: list[float] | None = None,
                       mode: str = "dag") -> DependencyGraph:
    times = times if times is not None else [float(i) for i in range(len(actions))]
    edges: list[tuple[int, int]] = []
    for j, action in enumerate(actions):
        parents = []
        # nearest earlier step first
        for i in range(j - 1, -1, -1):
            if depends(action, actions[i]):
                parents.append(i)
                if mode == "tree":
                    break
        if not parents:
            parents = [ROOT]
        edges.extend((p, j) for p in sorted(parents))
    nodes = tuple(GraphNode(i, float(t), a.name, a.args)
                  for i, (a, t) in enumerate(zip(actions, times)))
    return DependencyGraph(nodes, tuple(edges), mode)


def ready_set(graph: DependencyGraph, completed) -> tuple[int, ...]:
    """Uncompleted nodes whose parents are all completed, in plan order."""
    done = set(completed)
    for v in done:
        missing = [p for p in graph.parents(v) if p != ROOT and p not in done]
        if missing:
            raise NotClosed(f"node {v} is completed but its parent {missing[0]} is not")
    return tuple(n.index for n in graph.nodes
                 if n.index not in done
                 and all(p == ROOT or p in done for p in graph.parents(n.index)))


# ── serialisation ────────────────────────────────────────────────────────────

def _dot_label(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def emit(graph: DependencyGraph, fmt: str = "dot") -> str:
    if fmt == "dot":
        lines = ["digraph dependencies {", "  rankdir=TB;",
                 '  root [label="root", shape=doublecircle];']
        for n in graph.nodes:
            label = _dot_label(f"{n.index}: {n.text}")
            lines.append(f'  n{n.index} [label="{label}", shape=box];')
        for p, c in graph.edges:
            src = "root" if p == ROOT else f"n{p}"
            lines.append(f"  {src} -> n{c};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt in ("text", "structured-text"):
        lines = [f"mode {graph.mode}"]
        lines += [f"node {n.index} {format_timestamp(n.time)} {n.text}" for n in graph.nodes]
        lines += [f"edge {p} {c}" for p, c in graph.edges]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown graph format {fmt!r}")


_NODE_RE = re.compile(r"^node\s+(\d+)\s+(\S+)\s+\(([^()]*)\)\s*$")
_EDGE_RE = re.compile(r"^edge\s+(-?\d+)\s+(\d+)\s*$")


def load_graph(text: str) -> DependencyGraph:
    """Inverse of ``emit(graph, "text")``."""
    mode = "dag"
    nodes: list[GraphNode] = []
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";") or line.startswith("#"):
            continue
        if line.startswith("mode "):
            mode = line.split()[1]
            if mode not in MODES:
                raise GraphError(f"line {lineno}: unknown mode {mode!r}")
            continue
        m = _NODE_RE.match(line)
        if m:
            words = m.group(3).split()
            if not words:
                raise GraphError(f"line {lineno}: empty action")
            nodes.append(GraphNode(int(m.group(1)), float(m.group(2)), words[0],
                                   tuple(words[1:])))
            continue
        m = _EDGE_RE.match(line)
        if m:
            edges.append((int(m.group(1)), int(m.group(2))))
            continue
        raise GraphError(f"line {lineno}: cannot parse {line!r}")
    if [n.index for n in nodes] != list(range(len(nodes))):
        raise GraphError("node ids must be 0..n-1 in order")
    for p, c in edges:
        if not (p == ROOT or 0 <= p < c) or c >= len(nodes):
            raise GraphError(f"edge {p} -> {c} does not point forward in plan order")
    return DependencyGraph(tuple(nodes), tuple(edges), mode)
