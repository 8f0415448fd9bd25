"""Step-by-step plan validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PDDLError
from .model import Condition, Domain, Plan, Problem
from .state import State, apply_unchecked, ground_step, holds, initial_state, unmet_precondition


@dataclass(frozen=True)
class StepVerdict:
    index: int
    action: str
    applicable: bool
    reason: str = ""


@dataclass(frozen=True)
class ValidationReport:
    steps: tuple[StepVerdict, ...]
    first_failure: int | None
    final_state: State
    goal_satisfied: bool
    goal_fraction: float
    unmet_goals: tuple[Condition, ...] = field(default=())

    @property
    def valid(self) -> bool:
        return self.first_failure is None and self.goal_satisfied


def goal_progress(goal: tuple[Condition, ...], state: State) -> tuple[float, tuple[Condition, ...]]:
    """Fraction of goal conjuncts true in ``state`` (1.0 for an empty goal)."""
    unmet = []
    for cond in goal:
        try:
            ok = holds(cond, state)
        except PDDLError:
            ok = False
        if not ok:
            unmet.append(cond)
    if not goal:
        return 1.0, ()
    return float(Fraction(len(goal) - len(unmet), len(goal))), tuple(unmet)


def validate_plan(domain: Domain, problem: Problem, plan: Plan) -> ValidationReport:
    """Execute ``plan`` from the initial state and stop at the first failing step.

    Step indices are 0-based plan positions. Failures are report content, not
    exceptions.
    """
    state = initial_state(problem)
    verdicts: list[StepVerdict] = []
    first_failure = None
    for i, step in enumerate(plan.steps):
        try:
            action = ground_step(domain, problem, step)
            reason = unmet_precondition(state, action)
            if reason is None:
                state = apply_unchecked(state, action)
        except PDDLError as exc:
            reason = str(exc)
        if reason is not None:
            verdicts.append(StepVerdict(i, step.text, False, reason))
            first_failure = i
            break
        verdicts.append(StepVerdict(i, step.text, True))
    fraction, unmet = goal_progress(problem.goal, state)
    return ValidationReport(
        steps=tuple(verdicts),
        first_failure=first_failure,
        final_state=state,
        goal_satisfied=not unmet,
        goal_fraction=fraction,
        unmet_goals=unmet,
    )
