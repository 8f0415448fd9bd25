import pytest

from teamplan import data_path
from teamplan.depgraph import build_graph
from teamplan.mrta import Forbid, Require
from teamplan.pddl import (
    Comparison,
    FluentRef,
    Plan,
    State,
    initial_state,
    parse_plan,
    parse_problem,
    validate_plan,
)
from teamplan.pddl.model import Num
from teamplan.sim import (
    DONE,
    FAILED,
    SKIPPED,
    ExecutionTrace,
    InfeasibleSubtask,
    Outcome,
    check_schedule,
    execute,
    load_schedule,
    metrics,
    schedule,
    sequential_schedule,
)
from teamplan.sim.world import contents_from_state, warehouse_problem

from conftest import load_task, tiny_world


@pytest.fixture(scope="module")
def fridge_graph(fridge):
    domain, problem, plan = fridge
    return build_graph(plan, domain, problem)


def test_fridge_schedule_runs_opens_in_parallel(fridge_graph, kitchen_world):
    sched = schedule(fridge_graph, kitchen_world)
    e0, e1 = sched.entry(0), sched.entry(1)
    assert e0.start == e1.start == 0.0
    assert {e0.coalition, e1.coalition} == {("robot0",), ("robot1",)}
    assert sched.to_text().splitlines() == [
        "subtask 0 coalition robot0 start 0.0 end 8.0",
        "subtask 1 coalition robot1 start 0.0 end 8.0",
        "subtask 2 coalition robot0 start 8.0 end 25.0",
        "subtask 3 coalition robot1 start 8.0 end 27.0",
        "subtask 4 coalition robot0 start 25.0 end 26.0",
        "subtask 5 coalition robot1 start 27.0 end 28.0",
    ]
    assert check_schedule(sched, kitchen_world) == []


def test_single_robot_runs_sequentially(fridge_graph, kitchen_world):
    solo = kitchen_world.with_robots({"robot0": kitchen_world.robots["robot0"]})
    sched = schedule(fridge_graph, solo)
    assert sched.entry(1).start >= sched.entry(0).end
    assert check_schedule(sched, solo) == []


def _carry_six():
    world = tiny_world(robots=[
        {"id": "r4", "cell": [1, 1], "skills": {"carry": 4, "navigate": 1}},
        {"id": "r2", "cell": [2, 2], "skills": {"carry": 2, "navigate": 1}},
    ])
    text = warehouse_problem(world, {("shelf2", "product1"): 6}, name="carry")
    return world, text


def test_carry_six_needs_both_robots(warehouse_domain):
    world, text = _carry_six()
    problem = parse_problem(text, warehouse_domain)
    plan = parse_plan("0: (move-product shelf1 shelf2 product1 magnitude6)",
                      warehouse_domain, problem)
    graph = build_graph(plan, warehouse_domain, problem)
    sched = schedule(graph, world, fluents=initial_state(problem).fluents)
    assert sched.entry(0).coalition == ("r4", "r2")
    # r4 walks 2 cells to shelf1 then 5 to shelf2; r2 walks 4 then 5
    assert sched.entry(0).end == 9 + world.duration


def test_infeasible_subtask_names_unmet_skill(warehouse_domain):
    world, text = _carry_six()
    world = world.with_robots({"r4": world.robots["r4"]})
    problem = parse_problem(text, warehouse_domain)
    plan = parse_plan("0: (move-product shelf1 shelf2 product1 magnitude6)",
                      warehouse_domain, problem)
    graph = build_graph(plan, warehouse_domain, problem)
    with pytest.raises(InfeasibleSubtask) as err:
        schedule(graph, world, fluents=initial_state(problem).fluents)
    assert err.value.unmet == {"carry": 2.0}
    assert "carry short by 2" in str(err.value)


def test_constraints_steer_the_coalition(fridge_graph, kitchen_world):
    sched = schedule(fridge_graph, kitchen_world, [Forbid("robot0", "openobject *")])
    assert sched.entry(0).coalition == ("robot1",)
    assert sched.entry(1).coalition == ("robot1",)
    sched = schedule(fridge_graph, kitchen_world, [Require("robot1", "*fridge1*")])
    assert "robot1" in sched.entry(0).coalition
    assert check_schedule(sched, kitchen_world) == []


def test_schedule_is_deterministic(warehouse_domain):
    problem, world, cons = load_task(warehouse_domain, "fig4")
    plan = parse_plan(data_path("warehouse", "fig4.plan").read_text(), warehouse_domain, problem)
    graph = build_graph(plan, warehouse_domain, problem)
    fl = initial_state(problem).fluents
    assert schedule(graph, world, cons, fluents=fl) == schedule(graph, world, cons, fluents=fl)


def test_schedule_text_round_trip(fridge_graph, kitchen_world):
    sched = schedule(fridge_graph, kitchen_world)
    again = load_schedule(sched.to_text(), fridge_graph, kitchen_world)
    assert again.to_text() == sched.to_text()
    assert check_schedule(again, kitchen_world) == []


def test_check_schedule_reports_violations(fridge_graph, kitchen_world):
    text = ("subtask 0 coalition robot0 start 0 end 8\n"
            "subtask 1 coalition robot0 start 4 end 9\n"
            "subtask 2 coalition - start 5 end 6\n")
    problems = check_schedule(load_schedule(text, fridge_graph, kitchen_world), kitchen_world)
    assert any("overlaps" in p for p in problems)
    assert any("before parent 0" in p for p in problems)
    assert any("pick_up" in p for p in problems)
    assert any("never scheduled" in p for p in problems)


def test_sequential_baseline_walks_every_leg(fridge_graph, kitchen_world):
    seq = sequential_schedule(fridge_graph, kitchen_world, "robot0")
    assert [e.node for e in seq.entries] == list(range(6))
    assert all(a.end <= b.start for a, b in zip(seq.entries, seq.entries[1:]))


# ── execution ────────────────────────────────────────────────────────────────

def _fig4(warehouse_domain):
    problem, world, cons = load_task(warehouse_domain, "fig4")
    plan = parse_plan(data_path("warehouse", "fig4.plan").read_text(), warehouse_domain, problem)
    graph = build_graph(plan, warehouse_domain, problem)
    sched = schedule(graph, world, cons, fluents=initial_state(problem).fluents)
    return problem, world, plan, sched


def test_fig4_execution_matches_validator(warehouse_domain):
    problem, world, plan, sched = _fig4(warehouse_domain)
    trace = execute(sched, world, warehouse_domain, problem)
    report = validate_plan(warehouse_domain, problem, plan)
    assert trace.final_state == report.final_state
    assert {sid: s.contents for sid, s in trace.final_world.shelves.items()} == \
        contents_from_state(world, report.final_state.fluents)
    assert all(o.status == DONE for o in trace.outcomes)
    # per-robot travel is the sum of its path segments
    for rid in world.robot_ids:
        assert trace.travel[rid] == sum(s.length for s in trace.segments if s.robot == rid)
    m = metrics(trace, problem.goal, len(plan.steps))
    assert (m.sr, m.gcr, m.exe, m.ru) == (1, 1.0, 1.0, 1.0)
    assert m.tc_max >= m.tc_avg > 0


def test_empty_schedule(fridge, kitchen_world):
    domain, problem, _ = fridge
    graph = build_graph(Plan(()), domain, problem)
    sched = schedule(graph, kitchen_world)
    trace = execute(sched, kitchen_world, domain, problem)
    assert sched.entries == () and trace.outcomes == ()
    assert all(t == 0 for t in trace.travel.values())
    assert trace.final_state == initial_state(problem)
    assert trace.final_world == kitchen_world


def test_poisoned_subtask_fails_and_blocks_descendants(warehouse_domain):
    problem, world, plan, sched = _fig4(warehouse_domain)
    s0 = initial_state(problem)
    fluents = dict(s0.fluents)
    # step 2 moves four units of product1 off shelf4; leave only three there
    fluents[("amount", "shelf4", "product1")] = 3
    fluents[("free-space", "shelf4")] += 1
    trace = execute(sched, world, warehouse_domain, problem, initial=State(s0.atoms, fluents))
    assert trace.outcome(2).status == FAILED
    blocked = sched.graph.descendants(2)
    assert blocked and all(trace.outcome(v).status == SKIPPED for v in blocked)
    others = set(range(len(plan.steps))) - blocked - {2}
    assert all(trace.outcome(v).status == DONE for v in others)
    m = metrics(trace, problem.goal, len(plan.steps))
    assert m.exe < 1 and m.sr == 0


def _goal(value):
    return Comparison("=", FluentRef("amount", ("s", "p")), Num(value))


def _trace(travel, done=2, total=2, amount=5):
    outcomes = tuple(Outcome(i, "a", DONE if i < done else SKIPPED, 1.0) for i in range(total))
    state = State((), {("amount", "s", "p"): amount})
    return ExecutionTrace(outcomes, (), travel, tuple(travel), state, None)


def test_metrics_arithmetic():
    m = metrics(_trace({"a": 10.0, "b": 6.0}), [_goal(5)])
    assert (m.sr, m.exe, m.gcr, m.tc_max, m.tc_avg) == (1, 1.0, 1.0, 10.0, 8.0)
    assert m.to_text().splitlines()[:2] == ["SR=1", "GCR=1"]


def test_metrics_half_goal():
    m = metrics(_trace({"a": 1.0}), [_goal(5), _goal(6)])
    assert m.gcr == 0.5 and m.sr == 0


def test_metrics_reuse_ratio():
    assert metrics(_trace({"a": 1.0}, done=4, total=4), [_goal(5)], 4).ru == 1.0
    assert metrics(_trace({"a": 1.0}, done=4, total=4), [_goal(5)], 2).ru == 0.5
    assert metrics(_trace({"a": 1.0}, done=3, total=4), [_goal(5)]).exe == 0.75


def test_metrics_empty_goal_diagnostic():
    m = metrics(_trace({"a": 1.0}), [])
    assert m.gcr == 1.0 and m.diagnostics and "empty-goal" in m.diagnostics[0]
