import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamplan.pddl import (
    Comparison,
    FluentRef,
    State,
    apply,
    ground_step,
    initial_state,
    parse_problem,
    validate_plan,
)
from teamplan.pddl.model import Num
from teamplan.planner import (
    GroundTask,
    SearchBudgetExceeded,
    SearchConfig,
    Unsolvable,
    heuristic_value,
    numeric_bucket,
    plan,
)

from conftest import load_task, two_shelf_problem


def _cmp(op, name, args, value):
    return Comparison(op, FluentRef(name, args), Num(value))


def test_goal_already_satisfied_gives_empty_plan(warehouse_domain):
    p = parse_problem(two_shelf_problem(stock=2, goal=0), warehouse_domain)
    assert plan(warehouse_domain, p).steps == ()


def test_two_shelf_plan_is_valid(warehouse_domain):
    p = parse_problem(two_shelf_problem(stock=3, goal=3), warehouse_domain)
    result = plan(warehouse_domain, p)
    assert validate_plan(warehouse_domain, p, result).valid
    assert len(result.steps) == 2  # 3 = 2 + 1 with the available magnitudes


def test_demanding_more_than_exists_is_unsolvable(warehouse_domain):
    p = parse_problem(two_shelf_problem(stock=2, goal=3), warehouse_domain)
    with pytest.raises(Unsolvable):
        plan(warehouse_domain, p)


def test_expansion_budget(warehouse_domain):
    problem, _, _ = load_task(warehouse_domain, 8)
    with pytest.raises(SearchBudgetExceeded):
        plan(warehouse_domain, problem, SearchConfig(max_expansions=1))


def test_fridge_plan_found_and_valid(fridge):
    domain, problem, _ = fridge
    result = plan(domain, problem)
    assert validate_plan(domain, problem, result).valid


def test_blind_search_also_solves(warehouse_domain):
    p = parse_problem(two_shelf_problem(stock=3, goal=3), warehouse_domain)
    result = plan(warehouse_domain, p, SearchConfig(heuristic="blind"))
    assert validate_plan(warehouse_domain, p, result).valid


def test_search_is_deterministic(warehouse_domain):
    problem, _, _ = load_task(warehouse_domain, 2)
    assert plan(warehouse_domain, problem) == plan(warehouse_domain, problem)


@pytest.mark.parametrize("kwargs", [
    {"max_expansions": 0}, {"timeout": 0}, {"heuristic": "ff"}, {"tie_break": "lifo"},
])
def test_search_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SearchConfig(**kwargs)


def test_numeric_bucket_uses_residual_over_step():
    fluents = {("amount", "s", "p"): 1}
    cond = _cmp("=", "amount", ("s", "p"), 10)
    assert numeric_bucket(cond, fluents, 4) == 3  # ceil(9 / 4)
    assert numeric_bucket(cond, fluents, None) == 1
    assert numeric_bucket(_cmp(">=", "amount", ("s", "p"), 1), fluents, 4) == 0
    assert numeric_bucket(_cmp("<", "amount", ("s", "p"), 1), fluents, 100) == 1


def test_heuristic_zero_iff_goal_holds():
    state = State((), {("amount", "s", "p"): 5})
    goal = [_cmp("=", "amount", ("s", "p"), 5)]
    assert heuristic_value(state, goal, 2) == 0
    assert heuristic_value(state, [_cmp("=", "amount", ("s", "p"), 6)], 2) == 1
    # an unset fluent counts as one unmet conjunct
    assert heuristic_value(state, [_cmp("=", "amount", ("t", "p"), 6)], 2) == 1


def _walk(task, seed, length):
    rng = random.Random(seed)
    atoms, vals = task.init_atoms, task.init_vals
    for _ in range(length):
        ready = [op for op in task.ops if task.applicable(op, atoms, vals)]
        if not ready:
            break
        atoms, vals = task.successor(rng.choice(ready), atoms, vals)
    return atoms, vals


@settings(max_examples=40, deadline=None)
@given(tid=st.sampled_from([1, 4, 5, 8]), seed=st.integers(0, 10**6),
       length=st.integers(0, 15))
def test_compiled_goal_counter_matches_reference(warehouse_domain, tid, seed, length):
    problem, _, _ = load_task(warehouse_domain, tid)
    task = GroundTask(warehouse_domain, problem)
    atoms, vals = _walk(task, seed, length)
    state = task.to_state(atoms, vals)
    count = task.goal_counter(problem.goal)
    assert count(atoms, vals) == heuristic_value(state, problem.goal, task.step)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), length=st.integers(0, 10))
def test_compact_successor_matches_state_semantics(warehouse_domain, seed, length):
    problem, _, _ = load_task(warehouse_domain, 4)
    task = GroundTask(warehouse_domain, problem)
    rng = random.Random(seed)
    atoms, vals = task.init_atoms, task.init_vals
    state = initial_state(problem)
    for _ in range(length):
        ready = [op for op in task.ops if task.applicable(op, atoms, vals)]
        if not ready:
            break
        op = rng.choice(ready)
        atoms, vals = task.successor(op, atoms, vals)
        state = apply(state, ground_step(warehouse_domain, problem,
                                         (op.action.name, op.action.args)))
        assert task.to_state(atoms, vals) == state
