"""End-to-end composition: command text to generated problem, plan, graph,
schedule, simulated execution and metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import mrta
from .depgraph import build_graph
from .llm.generator import Generator, GeneratorError
from .llm.loop import LoopConfig, refine_loop
from .llm.request import GeneratorRequest
from .pddl.model import Condition
from .pddl.parser import parse_domain
from .pddl.state import initial_state
from .sim.execute import execute, metrics
from .sim.scheduler import SchedulingError, schedule
from .sim.world import World, WorldError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNSOLVABLE = 3
EXIT_ALLOCATION = 4
EXIT_GENERATOR = 5
EXIT_INVALID_PLAN = 6
EXIT_SIMULATION = 7
EXIT_USAGE = 64


def world_context(world: World) -> str:
    """Plain-text environment facts handed to the problem generator."""
    lines = []
    for sid in sorted(world.shelves):
        s = world.shelves[sid]
        stock = ", ".join(f"{n} {p}" for p, n in sorted(s.contents.items()) if n) or "nothing"
        lines.append(f"{sid} (capacity {s.capacity}) holds {stock}.")
    for name in sorted(world.landmarks):
        lines.append(f"{name} is at cell {list(world.landmarks[name])}.")
    lines.append(f"The team has {len(world.robots)} robots.")
    return "\n".join(lines)


@dataclass
class PipelineReport:
    exit_code: int = EXIT_OK
    stage: str = "done"
    error: str = ""
    rounds: list = field(default_factory=list)
    plan: list = field(default_factory=list)
    graph: dict = field(default_factory=dict)
    schedule: list = field(default_factory=list)
    makespan: float = 0.0
    metrics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"exit_code": self.exit_code, "stage": self.stage, "error": self.error,
                "rounds": self.rounds, "plan": self.plan, "graph": self.graph,
                "schedule": self.schedule, "makespan": self.makespan,
                "metrics": self.metrics}

    def to_json(self, pretty: bool = False) -> str:
        return json.dumps(self.to_dict(), indent=2 if pretty else None, sort_keys=True) + "\n"


def run_pipeline(command: str, domain_text: str, world: World, generator: Generator,
                 loop: LoopConfig | None = None,
                 constraints: Iterable[mrta.Constraint] = (), *,
                 ground_truth_goal: Sequence[Condition] | None = None,
                 ground_truth_transitions: int | None = None) -> PipelineReport:
    """Run every stage, stopping at the first failing one.

    The exit code is 0 only when every stage succeeded and the run met its
    goal (SR = 1).
    """
    loop = loop or LoopConfig()
    report = PipelineReport()
    request = GeneratorRequest(command, world_context(world), domain_text)
    try:
        outcome = refine_loop(request, loop, generator)
    except GeneratorError as exc:
        return _fail(report, "generation", EXIT_GENERATOR, str(exc))
    report.rounds = [r.to_dict() for r in outcome.rounds]
    if not outcome.ok:
        return _fail(report, "generation", EXIT_GENERATOR,
                     f"no valid problem after {len(outcome.rounds)} rounds")

    domain = parse_domain(domain_text)
    problem, plan = outcome.problem, outcome.plan
    report.plan = [s.text for s in plan.steps]
    graph = build_graph(plan, domain, problem, "dag")
    report.graph = {"nodes": len(graph.nodes), "edges": len(graph.edges),
                    "depth": graph.depth()}
    try:
        sched = schedule(graph, world, constraints, fluents=initial_state(problem).fluents)
    except (SchedulingError, WorldError, mrta.AllocationError) as exc:
        return _fail(report, "schedule", EXIT_ALLOCATION, str(exc))
    report.schedule = [e.to_line() for e in sched.entries]
    report.makespan = sched.makespan
    trace = execute(sched, world, domain, problem)
    goal = problem.goal if ground_truth_goal is None else ground_truth_goal
    gt = len(plan.steps) if ground_truth_transitions is None else ground_truth_transitions
    m = metrics(trace, goal, gt)
    report.metrics = m.to_dict()
    if not m.sr:
        return _fail(report, "simulate", EXIT_SIMULATION, "goal not reached in simulation")
    return report


def _fail(report: PipelineReport, stage: str, code: int, error: str) -> PipelineReport:
    report.stage = stage
    report.exit_code = code
    report.error = error
    return report
