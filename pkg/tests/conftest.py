import json
import random
import sys

import pytest

from teamplan import data_path, mrta
from teamplan.pddl import (
    Plan,
    PlanStep,
    applicable,
    apply,
    initial_state,
    parse_domain,
    parse_plan,
    parse_problem,
)
from teamplan.pddl.state import ground_all
from teamplan.sim.world import load_world

TASK_IDS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]


@pytest.fixture(scope="session")
def warehouse_domain():
    return parse_domain(data_path("domains", "inventory-management.pddl").read_text())


@pytest.fixture(scope="session")
def kitchen_domain():
    return parse_domain(data_path("domains", "kitchen.pddl").read_text())


@pytest.fixture(scope="session")
def fridge(kitchen_domain):
    problem = parse_problem(data_path("kitchen", "fridge.pddl").read_text(), kitchen_domain)
    plan = parse_plan(data_path("kitchen", "fridge.plan").read_text(), kitchen_domain, problem)
    return kitchen_domain, problem, plan


@pytest.fixture(scope="session")
def kitchen_world():
    return load_world(data_path("kitchen", "fridge.world.json"))


def load_task(domain, tid):
    """(problem, world, constraints) of one bundled warehouse task."""
    problem = parse_problem(data_path("warehouse", f"task{tid}.pddl").read_text(), domain)
    world = load_world(data_path("warehouse", f"task{tid}.world.json"))
    path = data_path("warehouse", f"task{tid}.constraints.json")
    constraints = [mrta.constraint_from_dict(d) for d in json.loads(path.read_text())] \
        if path.exists() else []
    return problem, world, constraints


@pytest.fixture(scope="session")
def tasks():
    return json.loads(data_path("warehouse", "tasks.json").read_text())


def two_shelf_problem(stock=2, goal=3):
    """Two shelves, one product; the goal asks shelf2 to hold ``goal`` units."""
    return f"""
(define (problem two-shelf)
  (:domain inventory-management)
  (:objects shelf1 shelf2 - shelf product1 - product magnitude1 magnitude2 - magnitude)
  (:init (different-shelves shelf1 shelf2) (different-shelves shelf2 shelf1)
    (= (amount shelf1 product1) {stock}) (= (amount shelf2 product1) 0)
    (= (free-space shelf1) 10) (= (free-space shelf2) 10)
    (= (value-of magnitude1) 1) (= (value-of magnitude2) 2))
  (:goal (and (= (amount shelf2 product1) {goal}))))
"""


def linearizations(graph, limit=None):
    """Every topological order of ``graph`` (up to ``limit`` of them)."""
    n = len(graph.nodes)
    parents = {v: {p for p in graph.parents(v) if p >= 0} for v in range(n)}
    out: list[tuple[int, ...]] = []

    def extend(prefix, placed):
        if limit is not None and len(out) >= limit:
            return
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for v in range(n):
            if v not in placed and parents[v] <= placed:
                prefix.append(v)
                placed.add(v)
                extend(prefix, placed)
                placed.discard(v)
                prefix.pop()

    extend([], set())
    return out


def random_walk_plan(domain, problem, seed, length):
    """A valid plan of at most ``length`` random applicable steps."""
    rng = random.Random(seed)
    actions = [a for s in domain.actions for a in ground_all(domain, problem, s)]
    state, steps = initial_state(problem), []
    for i in range(length):
        ready = [a for a in actions if applicable(state, a)]
        if not ready:
            break
        a = rng.choice(ready)
        state = apply(state, a)
        steps.append(PlanStep(float(i), a.name, a.args))
    return Plan(tuple(steps))


def tiny_world(**over):
    data = {
        "grid": {"width": 6, "height": 6, "blocked": []},
        "shelves": [{"id": "shelf1", "cell": [0, 0], "capacity": 10,
                     "contents": {"product1": 6}},
                    {"id": "shelf2", "cell": [5, 0], "capacity": 10, "contents": {}}],
        "robots": [{"id": "r0", "cell": [0, 0], "skills": {"carry": 4, "navigate": 1}}],
        "actions": {"move-product": {"params": ["?from", "?to", "?p", "?m"],
                                     "fixed": {"navigate": 1},
                                     "scaled": {"carry": "(value-of ?m)"},
                                     "target": "?to", "via": "?from"}},
    }
    data.update(over)
    return load_world(data)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        status, title = results[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}  {title}")
