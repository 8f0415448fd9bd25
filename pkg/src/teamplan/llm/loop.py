"""Debugger, verifier and the bounded generate-check-repair loop."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..pddl.errors import PDDLError, PDDLSyntaxError, SemanticError
from ..pddl.model import Domain, Plan, Problem
from ..pddl.parser import parse_domain, parse_problem
from ..pddl.validate import validate_plan
from ..planner import SearchBudgetExceeded, SearchConfig, Unsolvable, plan
from .generator import Generator
from .request import Diagnostics, GeneratorRequest, Message


def debug_check(text: str, domain: Domain) -> tuple[Diagnostics, Problem | None]:
    """Parse ``text`` against ``domain``; positional diagnostics on failure."""
    try:
        return Diagnostics(), parse_problem(text, domain)
    except PDDLSyntaxError as exc:
        hint = f" (expected {', '.join(exc.expected)})" if exc.expected else ""
        return Diagnostics("syntax", (Message(exc.message + hint, exc.line or None,
                                              exc.col or None),)), None
    except SemanticError as exc:
        return Diagnostics("semantic", (Message(exc.message, exc.line or None,
                                                exc.col or None, exc.token),)), None
    except PDDLError as exc:
        return Diagnostics.fail("semantic", str(exc)), None


def verify(problem: Problem, domain: Domain,
           config: SearchConfig | None = None) -> tuple[Diagnostics, Plan | None]:
    """Plan with a bounded search, then re-check the plan independently."""
    try:
        result = plan(domain, problem, config)
    except Unsolvable as exc:
        return Diagnostics.fail("plan-failure", f"unsolvable: {exc}"), None
    except SearchBudgetExceeded as exc:
        return Diagnostics.fail("plan-failure", f"timeout: {exc}"), None
    report = validate_plan(domain, problem, result)
    if report.first_failure is not None:
        bad = report.steps[report.first_failure]
        return Diagnostics.fail("goal-miss", f"step {bad.index} {bad.action}: {bad.reason}"), None
    if not report.goal_satisfied:
        return Diagnostics.fail("goal-miss", f"plan leaves {len(report.unmet_goals)} goal "
                                             f"conditions unmet"), None
    return Diagnostics(), result


@dataclass(frozen=True)
class LoopConfig:
    rounds: int = 4
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")


@dataclass(frozen=True)
class RoundRecord:
    index: int
    text: str
    diagnostics: Diagnostics

    def to_dict(self) -> dict:
        return {"round": self.index, "diagnostics": self.diagnostics.to_dict()}


@dataclass(frozen=True)
class LoopSuccess:
    problem_text: str
    problem: Problem
    plan: Plan
    rounds: tuple[RoundRecord, ...]

    ok = True


@dataclass(frozen=True)
class FailureReport:
    rounds: tuple[RoundRecord, ...]

    ok = False

    def to_dict(self) -> dict:
        return {"status": "failed", "rounds": [r.to_dict() for r in self.rounds]}


def refine_loop(request: GeneratorRequest, config: LoopConfig,
                generator: Generator) -> LoopSuccess | FailureReport:
    """Generate, check and repair for at most ``config.rounds`` generator calls.

    Each round's diagnostics are appended to the request's feedback before
    the next call. Generator errors (unavailable, empty answer) propagate.
    """
    if request.feedback:
        raise ValueError("the first request must carry no feedback")
    domain = parse_domain(request.domain_text)
    history: list[RoundRecord] = []
    for k in range(1, config.rounds + 1):
        text = generator.generate(request)
        diag, problem = debug_check(text, domain)
        result = None
        if diag.ok:
            diag, result = verify(problem, domain, config.search)
        history.append(RoundRecord(k, text, diag))
        if diag.ok:
            return LoopSuccess(text, problem, result, tuple(history))
        request = request.with_feedback(diag)
    return FailureReport(tuple(history))
