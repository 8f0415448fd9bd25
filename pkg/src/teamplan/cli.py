"""Command-line entry point: ``teamplan <subcommand> [flags]``.

Exit codes:
  0   success
  2   PDDL or input-file parse error
  3   planner found no plan (unsolvable or budget exhausted)
  4   no feasible coalition for some subtask
  5   problem generator failed (transport error or round budget spent)
  6   plan does not validate
  7   simulation did not reach the goal (SR = 0)
  64  usage error (bad flags, missing files)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import mrta
from .depgraph import InvalidPlan, build_graph, emit
from .llm.generator import GeneratorError, load_config, make_generator
from .llm.loop import LoopConfig
from .pddl.errors import PDDLError
from .pddl.parser import parse_domain, parse_plan, parse_problem
from .pddl.printer import print_plan
from .pddl.state import initial_state
from .pddl.validate import validate_plan
from .pipeline import (
    EXIT_ALLOCATION,
    EXIT_GENERATOR,
    EXIT_INVALID_PLAN,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_SIMULATION,
    EXIT_UNSOLVABLE,
    EXIT_USAGE,
    run_pipeline,
)
from .planner import PlanningError, SearchConfig, plan
from .sim.execute import execute, metrics
from .sim.scheduler import SchedulingError, load_schedule, schedule
from .sim.world import World, WorldError, load_world, randomize_robots


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path) -> str:
    if path is None:
        raise UsageError("a required input file was not given")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_text()


def _json(data, pretty: bool) -> str:
    return json.dumps(data, indent=2 if pretty else None, sort_keys=True) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _domain(args):
    return parse_domain(_read(args.domain))


def _problem(args, domain):
    return parse_problem(_read(args.problem), domain)


def _world(args) -> World:
    _read(args.world)
    world = load_world(args.world)
    return randomize_robots(world, args.seed) if args.seed is not None else world


def _constraints(args) -> list:
    if not args.constraints:
        return []
    data = json.loads(_read(args.constraints))
    return [mrta.constraint_from_dict(d) for d in data]


def _search(args) -> SearchConfig:
    return SearchConfig(max_expansions=args.budget) if args.budget else SearchConfig()


# ── subcommands ──────────────────────────────────────────────────────────────

def cmd_parse(args) -> int:
    domain = _domain(args)
    out = {"status": "ok", "domain": domain.name, "actions": len(domain.actions)}
    if args.problem:
        problem = _problem(args, domain)
        out.update(problem=problem.name, objects=len(problem.objects),
                   goal_conditions=len(problem.goal))
        if args.plan:
            out["plan_steps"] = len(parse_plan(_read(args.plan), domain, problem).steps)
    _emit(args, _json(out, args.pretty))
    return EXIT_OK


def cmd_plan(args) -> int:
    domain = _domain(args)
    problem = _problem(args, domain)
    result = plan(domain, problem, _search(args))
    _emit(args, print_plan(result))
    return EXIT_OK


def cmd_validate(args) -> int:
    domain = _domain(args)
    problem = _problem(args, domain)
    report = validate_plan(domain, problem, parse_plan(_read(args.plan), domain, problem))
    out = {
        "valid": report.valid,
        "first_failure": report.first_failure,
        "goal_satisfied": report.goal_satisfied,
        "goal_fraction": report.goal_fraction,
        "steps": [{"index": s.index, "action": s.action, "applicable": s.applicable,
                   "reason": s.reason} for s in report.steps],
    }
    _emit(args, _json(out, args.pretty))
    return EXIT_OK if report.valid else EXIT_INVALID_PLAN


def _graph(args):
    domain = _domain(args)
    problem = _problem(args, domain)
    return domain, problem, build_graph(parse_plan(_read(args.plan), domain, problem),
                                        domain, problem, args.mode)


def cmd_graph(args) -> int:
    _, _, graph = _graph(args)
    _emit(args, emit(graph, args.format))
    return EXIT_OK


def cmd_allocate(args) -> int:
    inst = mrta.instance_from_dict(json.loads(_read(args.instance)))
    result = inst.solve()
    _emit(args, _json(result.to_dict(), args.pretty))
    return EXIT_OK if result.optimal else EXIT_ALLOCATION


def cmd_schedule(args) -> int:
    _, problem, graph = _graph(args)
    sched = schedule(graph, _world(args), _constraints(args),
                     fluents=initial_state(problem).fluents)
    _emit(args, sched.to_text())
    return EXIT_OK


def cmd_simulate(args) -> int:
    domain, problem, graph = _graph(args)
    world = _world(args)
    fluents = initial_state(problem).fluents
    if args.schedule:
        sched = load_schedule(_read(args.schedule), graph, world, fluents=fluents)
    else:
        sched = schedule(graph, world, _constraints(args), fluents=fluents)
    trace = execute(sched, world, domain, problem)
    report = metrics(trace, problem.goal, len(graph.nodes))
    _emit(args, trace.to_text() + report.to_text())
    return EXIT_OK if report.sr else EXIT_SIMULATION


def cmd_pipeline(args) -> int:
    config = load_config(args.config)
    generator = make_generator(config)
    domain_text = _read(args.domain)
    truth = parse_problem(_read(args.problem), parse_domain(domain_text)) if args.problem else None
    loop = LoopConfig(config.rounds, SearchConfig(max_expansions=args.budget
                                                  or config.planner_expansions,
                                                  timeout=config.planner_timeout))
    report = run_pipeline(args.command, domain_text, _world(args), generator, loop,
                          _constraints(args),
                          ground_truth_goal=truth.goal if truth else None)
    _emit(args, report.to_json(args.pretty))
    return report.exit_code


# ── argument parsing ─────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="teamplan", description="Team-level planning and multi-robot "
                                                  "allocation toolkit.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p, *, problem=True, plan_file=False, world=False):
        p.add_argument("--domain", required=True, help="PDDL domain file")
        if problem:
            p.add_argument("--problem", help="PDDL problem file")
        if plan_file:
            p.add_argument("--plan", required=True, help="plan file ('<t>: (action ...)' lines)")
            p.add_argument("--mode", choices=("dag", "tree"), default="dag")
        if world:
            p.add_argument("--world", required=True, help="world JSON file")
            p.add_argument("--constraints", help="JSON list of allocation constraints")
            p.add_argument("--seed", type=int, help="randomise robot start cells")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--pretty", action="store_true", help="indent JSON output")

    p = sub.add_parser("parse", help="check domain, problem and plan files")
    common(p)
    p.add_argument("--plan")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("plan", help="search for a plan")
    common(p)
    p.add_argument("--budget", type=int, help="maximum node expansions")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="replay a plan and check the goal")
    common(p)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="subtask dependency graph of a plan")
    common(p, plan_file=True)
    p.add_argument("--format", choices=("dot", "text", "structured-text"), default="dot")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("allocate", help="solve one coalition-selection instance")
    p.add_argument("instance", help="instance JSON: robots, requirement, constraints")
    p.add_argument("--out")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("schedule", help="allocate and time every subtask")
    common(p, plan_file=True, world=True)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="execute a schedule and report metrics")
    common(p, plan_file=True, world=True)
    p.add_argument("--schedule", help="schedule records to replay (default: compute one)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="command text to executed plan, end to end")
    p.add_argument("--command", required=True, help="natural-language task command")
    p.add_argument("--config", required=True, help="generator/loop JSON config")
    common(p, world=True)
    p.add_argument("--budget", type=int, help="planner expansion budget")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "problem", "unset") is None and args.subcommand in (
            "plan", "validate", "graph", "schedule", "simulate"):
        parser.error("--problem is required")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"teamplan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PDDLError, json.JSONDecodeError, WorldError, KeyError, ValueError) as exc:
        print(f"teamplan: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidPlan as exc:
        print(f"teamplan: invalid plan: {exc}", file=sys.stderr)
        return EXIT_INVALID_PLAN
    except PlanningError as exc:
        print(f"teamplan: no plan: {exc}", file=sys.stderr)
        return EXIT_UNSOLVABLE
    except (SchedulingError, mrta.AllocationError) as exc:
        print(f"teamplan: allocation failed: {exc}", file=sys.stderr)
        return EXIT_ALLOCATION
    except GeneratorError as exc:
        print(f"teamplan: generator failed: {exc}", file=sys.stderr)
        return EXIT_GENERATOR


if __name__ == "__main__":
    sys.exit(main())
