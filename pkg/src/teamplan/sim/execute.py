"""Replaying a schedule against the symbolic state, and run metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..pddl.errors import PDDLError
from ..pddl.model import Condition, Domain, Problem
from ..pddl.state import State, apply_unchecked, ground_step, initial_state, unmet_precondition
from ..pddl.validate import goal_progress
from .scheduler import Schedule
from .world import Cell, World, contents_from_state

DONE, FAILED, SKIPPED = "done", "failed", "skipped"


@dataclass(frozen=True)
class Segment:
    robot: str
    node: int
    path: tuple[Cell, ...]

    @property
    def length(self) -> int:
        return max(0, len(self.path) - 1)


@dataclass(frozen=True)
class Outcome:
    node: int
    action: str
    status: str
    time: float
    reason: str = ""


@dataclass(frozen=True)
class ExecutionTrace:
    outcomes: tuple[Outcome, ...]
    segments: tuple[Segment, ...]
    travel: Mapping[str, float]
    participants: tuple[str, ...]
    final_state: State
    final_world: World
    states: tuple[State, ...] = field(default=(), repr=False)

    @property
    def executed(self) -> int:
        return sum(1 for o in self.outcomes if o.status == DONE)

    @property
    def total(self) -> int:
        return len(self.outcomes)

    def outcome(self, node: int) -> Outcome:
        for o in self.outcomes:
            if o.node == node:
                return o
        raise KeyError(node)

    def to_text(self) -> str:
        lines = [f"outcome {o.node} {o.status} time {o.time:g} {o.action}"
                 + (f" ; {o.reason}" if o.reason else "") for o in self.outcomes]
        lines += [f"travel {r} {t:g}" for r, t in self.travel.items()]
        return "\n".join(lines) + "\n"


def execute(schedule: Schedule, world: World, domain: Domain, problem: Problem, *,
            initial: State | None = None) -> ExecutionTrace:
    """Apply each scheduled subtask's effects at its end time.

    Robots walk shortest paths to each subtask they serve. A subtask whose
    action is inapplicable when it completes fails; subtasks depending on a
    failed one are skipped and their robots stay put.
    """
    state = initial if initial is not None else initial_state(problem)
    graph = schedule.graph
    pos = {rid: r.cell for rid, r in world.robots.items()}
    travel = {rid: r.travel for rid, r in world.robots.items()}
    segments: list[Segment] = []
    outcomes: dict[int, Outcome] = {}
    blocked: set[int] = set()
    participants: set[str] = set()
    states = [state]
    for e in sorted(schedule.entries, key=lambda e: (e.end, e.node)):
        node = graph.node(e.node)
        if e.node in blocked:
            outcomes[e.node] = Outcome(e.node, e.action, SKIPPED, e.end,
                                       "depends on a failed subtask")
            continue
        for rid in e.coalition:
            participants.add(rid)
            if e.target is None:
                continue
            path = _route(world, pos[rid], e.target, e.via)
            segments.append(Segment(rid, e.node, path))
            travel[rid] += max(0, len(path) - 1)
            pos[rid] = e.target
        try:
            action = ground_step(domain, problem, node.step)
            reason = unmet_precondition(state, action)
        except PDDLError as exc:
            reason = str(exc)
        if reason is None:
            state = apply_unchecked(state, action)
            states.append(state)
            outcomes[e.node] = Outcome(e.node, e.action, DONE, e.end)
        else:
            outcomes[e.node] = Outcome(e.node, e.action, FAILED, e.end, reason)
            blocked |= graph.descendants(e.node)
    final_world = world.with_contents(contents_from_state(world, state.fluents)) \
        if world.shelves else world
    return ExecutionTrace(
        outcomes=tuple(outcomes[e.node] for e in schedule.entries),
        segments=tuple(segments),
        travel=travel,
        participants=tuple(r for r in world.robot_ids if r in participants),
        final_state=state,
        final_world=final_world,
        states=tuple(states),
    )


def _route(world: World, start: Cell, target: Cell, via: Cell | None) -> tuple[Cell, ...]:
    if via is None:
        path = world.grid.path(start, target)
    else:
        first, second = world.grid.path(start, via), world.grid.path(via, target)
        path = first + second[1:] if first and second else []
    return tuple(path) if path else (tuple(start),)


# ── metrics ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MetricsReport:
    sr: int
    gcr: float
    exe: float
    ru: float
    tc_max: float
    tc_avg: float
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"SR": self.sr, "GCR": self.gcr, "Exe": self.exe, "RU": self.ru,
                "TC_max": self.tc_max, "TC_avg": self.tc_avg,
                "diagnostics": list(self.diagnostics)}

    def to_text(self) -> str:
        d = self.to_dict()
        lines = [f"{k}={_num(v)}" for k, v in d.items() if k != "diagnostics"]
        lines += [f"diagnostic={msg}" for msg in self.diagnostics]
        return "\n".join(lines) + "\n"


def _num(v) -> str:
    return str(v) if isinstance(v, int) else f"{v:.6g}"


def metrics(trace: ExecutionTrace, goal: Sequence[Condition],
            ground_truth_transitions: int | None = None) -> MetricsReport:
    """SR, GCR, Exe, RU and travel statistics of one run.

    RU is ground truth transitions over executed transitions, capped at 1;
    TC_avg averages over robots that served at least one subtask.
    """
    diagnostics = []
    if not goal:
        diagnostics.append("empty-goal: goal condition recall is undefined, reported as 1")
    gcr, _ = goal_progress(tuple(goal), trace.final_state)
    exe = trace.executed / trace.total if trace.total else 1.0
    gt = trace.total if ground_truth_transitions is None else ground_truth_transitions
    if trace.executed:
        ru = min(1.0, gt / trace.executed)
    else:
        ru = 1.0 if gt == 0 else 0.0
    tc_max = max(trace.travel.values(), default=0.0)
    used = [trace.travel[r] for r in trace.participants]
    tc_avg = sum(used) / len(used) if used else 0.0
    return MetricsReport(int(math.isclose(gcr, 1.0)), gcr, exe, ru, float(tc_max),
                         float(tc_avg), tuple(diagnostics))
