from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamplan.depgraph import (
    ROOT,
    GraphError,
    InvalidPlan,
    NotClosed,
    build_graph,
    depends,
    emit,
    load_graph,
    ready_set,
)
from teamplan.pddl import Plan, apply, ground_step, initial_state, parse_plan

from conftest import linearizations, load_task, random_walk_plan

GOLDEN = Path(__file__).parent / "golden"


def test_fridge_dag_matches_golden(fridge):
    domain, problem, plan = fridge
    graph = build_graph(plan, domain, problem, "dag")
    assert emit(graph, "dot") == (GOLDEN / "fridge_dag.dot").read_text()
    assert graph.depth() == 3


def test_fridge_tree_has_single_parents(fridge):
    domain, problem, plan = fridge
    dag = build_graph(plan, domain, problem, "dag")
    tree = build_graph(plan, domain, problem, "tree")
    assert all(len(tree.parents(n.index)) == 1 for n in tree.nodes)
    assert set(tree.edges) <= set(dag.edges)
    # the nearest dependent predecessor wins
    assert tree.parents(4) == (2,) and tree.parents(5) == (3,)


def test_dependency_is_directional_on_reads(fridge):
    domain, problem, plan = fridge
    acts = [ground_step(domain, problem, s) for s in plan.steps]
    assert depends(acts[2], acts[0])       # store needs the door opened
    assert depends(acts[4], acts[2])       # closing must wait for the store
    assert not depends(acts[1], acts[0])   # different fridges


def test_empty_plan_gives_empty_graph(fridge):
    domain, problem, _ = fridge
    graph = build_graph(Plan(()), domain, problem)
    assert graph.nodes == () and graph.edges == () and graph.depth() == 0
    assert emit(graph, "text") == "mode dag\n"


def test_invalid_plan_rejected(fridge):
    domain, problem, _ = fridge
    bad = parse_plan("0.0: (storeobject apple table1 fridge1)", domain, problem)
    with pytest.raises(InvalidPlan):
        build_graph(bad, domain, problem)


def test_unknown_mode(fridge):
    domain, problem, plan = fridge
    with pytest.raises(ValueError):
        build_graph(plan, domain, problem, "forest")


def test_ready_set_progression(fridge):
    domain, problem, plan = fridge
    graph = build_graph(plan, domain, problem)
    assert ready_set(graph, []) == (0, 1)
    assert ready_set(graph, [0]) == (1, 2)
    assert ready_set(graph, [0, 2]) == (1, 4)
    assert ready_set(graph, range(6)) == ()
    with pytest.raises(NotClosed):
        ready_set(graph, [2])


@pytest.mark.parametrize("mode", ["dag", "tree"])
def test_text_round_trip(fridge, mode):
    domain, problem, plan = fridge
    graph = build_graph(plan, domain, problem, mode)
    assert load_graph(emit(graph, "text")) == graph
    assert emit(graph, "structured-text") == emit(graph, "text")


def test_load_graph_rejects_backward_edges():
    with pytest.raises(GraphError):
        load_graph("node 0 0.0 (a)\nnode 1 1.0 (b)\nedge 1 0\n")
    with pytest.raises(GraphError):
        load_graph("node 0 0.0 (a)\nwhat is this\n")


def test_every_node_reachable_from_root(warehouse_domain):
    problem, _, _ = load_task(warehouse_domain, "fig4")
    plan = random_walk_plan(warehouse_domain, problem, 3, 8)
    graph = build_graph(plan, warehouse_domain, problem)
    roots = [c for p, c in graph.edges if p == ROOT]
    reached = set(roots)
    for r in roots:
        reached |= graph.descendants(r)
    assert reached == {n.index for n in graph.nodes}


def _final(domain, problem, plan, order):
    state = initial_state(problem)
    for i in order:
        state = apply(state, ground_step(domain, problem, plan.steps[i]))
    return state


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), length=st.integers(1, 6))
def test_dag_linearizations_reach_the_same_state(warehouse_domain, seed, length):
    problem, _, _ = load_task(warehouse_domain, 4)
    plan = random_walk_plan(warehouse_domain, problem, seed, length)
    graph = build_graph(plan, warehouse_domain, problem, "dag")
    expected = _final(warehouse_domain, problem, plan, range(len(plan.steps)))
    for order in linearizations(graph, limit=200):
        # apply() raises NotApplicable if an order breaks a precondition
        assert _final(warehouse_domain, problem, plan, order) == expected
