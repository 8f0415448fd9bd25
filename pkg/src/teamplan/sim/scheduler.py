"""Dependency-graph-driven scheduling with one coalition selection per subtask.

Ready subtasks are taken in plan order. For each one the idle robots are
priced by the travel they have already done plus the route to the subtask,
busy robots are fixed out of the coalition, and the lexicographic min-max /
min-sum coalition is dispatched. When no idle coalition works, time jumps to
the next completion and the same subtask is retried.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .. import mrta
from ..depgraph import ROOT, DependencyGraph, ready_set
from .world import Cell, World, route_length, subtask_requirement


class SchedulingError(Exception):
    pass


class InfeasibleSubtask(SchedulingError):
    def __init__(self, node: int, action: str, unmet: Mapping[str, float]):
        self.node = node
        self.action = action
        self.unmet = dict(unmet)
        detail = ", ".join(f"{k} short by {v:g}" for k, v in sorted(self.unmet.items()))
        super().__init__(f"no coalition can perform subtask {node} {action}"
                         + (f": {detail}" if detail else " under the given constraints"))


class CyclicGraph(SchedulingError):
    pass


@dataclass(frozen=True)
class ScheduleEntry:
    node: int
    action: str
    coalition: tuple[str, ...]
    start: float
    end: float
    target: Cell | None
    via: Cell | None = None
    requirement: Mapping[str, float] = field(default_factory=dict)
    costs: Mapping[str, float] = field(default_factory=dict)

    def to_line(self) -> str:
        ids = ",".join(self.coalition) if self.coalition else "-"
        return (f"subtask {self.node} coalition {ids} "
                f"start {_fmt(self.start)} end {_fmt(self.end)}")


def _fmt(t: float) -> str:
    return f"{t:.6g}" if not float(t).is_integer() else f"{t:.1f}"


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...]
    graph: DependencyGraph
    robot_ids: tuple[str, ...] = ()

    @property
    def makespan(self) -> float:
        return max((e.end for e in self.entries), default=0.0)

    def entry(self, node: int) -> ScheduleEntry:
        for e in self.entries:
            if e.node == node:
                return e
        raise KeyError(node)

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.entries)


def schedule(graph: DependencyGraph, world: World,
             constraints: Iterable[mrta.Constraint] = (), *,
             fluents: Mapping | None = None, duration: float | None = None) -> Schedule:
    """Discrete-event allocation of every graph node to a robot coalition.

    ``fluents`` supplies static values (e.g. magnitudes) for scaled skill
    demands; ``duration`` overrides the world's fixed work time per subtask.
    """
    constraints = tuple(constraints)
    work = world.duration if duration is None else duration
    ids = world.robot_ids
    skills = {rid: world.robots[rid].skills for rid in ids}
    pos = {rid: world.robots[rid].cell for rid in ids}
    travel = {rid: world.robots[rid].travel for rid in ids}
    busy: set[str] = set()
    running: list[tuple[float, int, ScheduleEntry]] = []
    completed: set[int] = set()
    started: set[int] = set()
    entries: list[ScheduleEntry] = []
    now = 0.0
    total = len(graph.nodes)

    while len(completed) < total:
        waiting = [v for v in ready_set(graph, completed) if v not in started]
        if waiting:
            v = waiting[0]
            node = graph.node(v)
            demand = subtask_requirement(node, world, fluents)
            action = node.text
            _, Q, Y = mrta.skill_matrix(skills, demand.requirement)
            costs: dict[str, float] = {}
            extra: list[mrta.Constraint] = []
            for rid in ids:
                leg = route_length(world.grid, pos[rid], demand.target, demand.via) \
                    if demand.target is not None else 0.0
                if rid in busy or math.isinf(leg):
                    extra.append(mrta.ForceValue(rid, 0))
                    costs[rid] = 0.0 if math.isinf(leg) else travel[rid] + leg
                else:
                    costs[rid] = travel[rid] + leg
            c = [costs[rid] for rid in ids]
            try:
                sol = mrta.solve(Q, Y, c, (*constraints, *extra), action=action, robot_ids=ids)
            except mrta.ConflictingFixings:
                # a required robot is busy or cannot reach the target
                sol = mrta.Assignment((0,) * len(ids), math.inf, math.inf, "infeasible", ids)
            if sol.optimal:
                coalition = sol.coalition()
                arrival = now
                for rid in coalition:
                    leg = route_length(world.grid, pos[rid], demand.target, demand.via) \
                        if demand.target is not None else 0.0
                    arrival = max(arrival, now + leg / world.speed)
                    travel[rid] += leg
                    if demand.target is not None:
                        pos[rid] = demand.target
                    busy.add(rid)
                entry = ScheduleEntry(v, action, coalition, now, arrival + work,
                                      demand.target, demand.via, dict(demand.requirement),
                                      {rid: costs[rid] for rid in coalition})
                entries.append(entry)
                started.add(v)
                heapq.heappush(running, (entry.end, v, entry))
                continue
            if not running:
                raise InfeasibleSubtask(v, action, _unmet(skills, demand.requirement,
                                                          constraints, action, ids))
        if not running:
            raise CyclicGraph("no subtask is ready and none is running")
        now, _, done = heapq.heappop(running)
        finished = [done]
        while running and running[0][0] <= now:
            finished.append(heapq.heappop(running)[2])
        for e in finished:
            completed.add(e.node)
            busy.difference_update(e.coalition)
    return Schedule(tuple(entries), graph, ids)


def _unmet(skills, requirement, constraints, action, ids) -> dict[str, float]:
    try:
        fixed = {f.robot: f.value for f in mrta.apply_constraints(constraints, action)}
    except mrta.ConflictingFixings:
        fixed = {}
    usable = [rid for rid in ids if fixed.get(rid, 1) == 1]
    gap = {}
    for skill, need in requirement.items():
        have = sum(skills[rid].get(skill, 0.0) for rid in usable)
        if have + mrta.TOL < need:
            gap[skill] = need - have
    return gap


def sequential_schedule(graph: DependencyGraph, world: World, robot_id: str, *,
                        fluents: Mapping | None = None) -> Schedule:
    """One robot performs every subtask in plan order, ignoring skill limits.

    Baseline for travel comparisons, not a feasible multi-robot plan.
    """
    robot = world.robots[robot_id]
    pos, travel, now = robot.cell, 0.0, 0.0
    entries = []
    for node in graph.nodes:
        demand = subtask_requirement(node, world, fluents)
        leg = route_length(world.grid, pos, demand.target, demand.via) \
            if demand.target is not None else 0.0
        end = now + leg / world.speed + world.duration
        entries.append(ScheduleEntry(node.index, node.text, (robot_id,), now, end,
                                     demand.target, demand.via, dict(demand.requirement),
                                     {robot_id: travel + leg}))
        travel += leg
        pos = demand.target if demand.target is not None else pos
        now = end
    return Schedule(tuple(entries), graph, (robot_id,))


_LINE = re.compile(r"^subtask\s+(\d+)\s+coalition\s+(\S+)\s+start\s+(\S+)\s+end\s+(\S+)\s*$")


def load_schedule(text: str, graph: DependencyGraph, world: World, *,
                  fluents: Mapping | None = None) -> Schedule:
    """Read ``subtask ... coalition ... start ... end ...`` records back.

    Targets and requirements are recomputed from the graph and the world.
    """
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if m is None:
            raise SchedulingError(f"line {lineno}: cannot parse {line!r}")
        v = int(m.group(1))
        if not 0 <= v < len(graph.nodes):
            raise SchedulingError(f"line {lineno}: no subtask {v} in the graph")
        node = graph.node(v)
        coalition = () if m.group(2) == "-" else tuple(m.group(2).split(","))
        unknown = [r for r in coalition if r not in world.robots]
        if unknown:
            raise SchedulingError(f"line {lineno}: unknown robot {unknown[0]}")
        demand = subtask_requirement(node, world, fluents)
        entries.append(ScheduleEntry(v, node.text, coalition, float(m.group(3)),
                                     float(m.group(4)), demand.target, demand.via,
                                     dict(demand.requirement)))
    return Schedule(tuple(entries), graph, world.robot_ids)


# ── post-hoc checks ──────────────────────────────────────────────────────────

def check_schedule(sched: Schedule, world: World) -> list[str]:
    """Violations of coverage, mutual exclusion and precedence (empty if none)."""
    problems = []
    by_node = {e.node: e for e in sched.entries}
    for n in sched.graph.nodes:
        if n.index not in by_node:
            problems.append(f"subtask {n.index} was never scheduled")
    for e in sched.entries:
        for skill, need in e.requirement.items():
            have = sum(world.robots[r].skills.get(skill, 0.0) for r in e.coalition)
            if have + mrta.TOL < need:
                problems.append(f"subtask {e.node}: {skill} {have:g} < {need:g}")
        for p in sched.graph.parents(e.node):
            if p != ROOT and p in by_node and by_node[p].end > e.start + 1e-9:
                problems.append(f"subtask {e.node} starts at {e.start:g} before "
                                f"parent {p} ends at {by_node[p].end:g}")
    per_robot: dict[str, list[ScheduleEntry]] = {}
    for e in sched.entries:
        for r in e.coalition:
            per_robot.setdefault(r, []).append(e)
    for r, items in per_robot.items():
        items.sort(key=lambda e: (e.start, e.end))
        for a, b in zip(items, items[1:]):
            if b.start < a.end - 1e-9:
                problems.append(f"robot {r} overlaps subtasks {a.node} and {b.node}")
    return problems
