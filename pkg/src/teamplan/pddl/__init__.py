"""Parsing, grounding, simulation and validation of the supported PDDL subset."""

from .errors import (
    ArityMismatch,
    MissingFluent,
    NotApplicable,
    PDDLError,
    PDDLSyntaxError,
    SemanticError,
    UnknownAction,
    UnknownRequirement,
)
from .model import (
    ActionSchema,
    Atom,
    Comparison,
    Domain,
    FluentRef,
    Literal,
    Plan,
    PlanStep,
    Problem,
)
from .parser import parse_domain, parse_plan, parse_problem
from .printer import print_domain, print_plan, print_problem
from .state import (
    GroundAction,
    State,
    applicable,
    apply,
    ground,
    ground_step,
    holds,
    initial_state,
)
from .validate import ValidationReport, goal_progress, validate_plan

__all__ = [
    "ActionSchema", "ArityMismatch", "Atom", "Comparison", "Domain", "FluentRef",
    "GroundAction", "Literal", "MissingFluent", "NotApplicable", "PDDLError",
    "PDDLSyntaxError", "Plan", "PlanStep", "Problem", "SemanticError", "State",
    "UnknownAction", "UnknownRequirement", "ValidationReport", "applicable", "apply",
    "goal_progress", "ground", "ground_step", "holds", "initial_state", "parse_domain",
    "parse_plan", "parse_problem", "print_domain", "print_plan", "print_problem",
    "validate_plan",
]
