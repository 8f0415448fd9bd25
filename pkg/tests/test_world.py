import math
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamplan.pddl import PlanStep, initial_state
from teamplan.sim.world import (
    Grid,
    UnknownCell,
    UnknownRobot,
    UnmappedAction,
    WorldError,
    contents_from_state,
    load_world,
    randomize_robots,
    travel_cost,
    subtask_requirement,
)

from conftest import load_task, tiny_world


def test_travel_on_empty_grid_is_manhattan():
    w = tiny_world()
    assert travel_cost(w, "r0", (3, 4)) == 7
    assert travel_cost(w, "r0", (0, 0)) == 0


def test_walled_off_target_is_unreachable():
    w = tiny_world(grid={"width": 6, "height": 6, "blocked": [[4, 4], [4, 5], [5, 4]]})
    assert travel_cost(w, "r0", (5, 5)) == math.inf


def test_travel_errors():
    w = tiny_world()
    with pytest.raises(UnknownRobot):
        travel_cost(w, "ghost", (1, 1))
    with pytest.raises(UnknownCell):
        travel_cost(w, "r0", (9, 9))


def test_move_product_requirement_and_target(warehouse_domain):
    problem, world, _ = load_task(warehouse_domain, "fig4")
    fluents = initial_state(problem).fluents
    step = PlanStep(0.0, "move-product", ("shelf2", "shelf3", "product3", "magnitude6"))
    demand = subtask_requirement(step, world, fluents)
    assert demand.requirement == {"carry": 6.0, "navigate": 1.0}
    assert demand.target == world.shelves["shelf3"].cell
    assert demand.via == world.shelves["shelf2"].cell


def test_zero_magnitude_empties_requirement():
    w = tiny_world()
    step = PlanStep(0.0, "move-product", ("shelf1", "shelf2", "product1", "magnitude0"))
    assert subtask_requirement(step, w, {("value-of", "magnitude0"): 0}).requirement == {}


def test_open_object_requirement(kitchen_world):
    demand = subtask_requirement(PlanStep(0.0, "openobject", ("fridge1",)), kitchen_world)
    assert demand.requirement == {"open_door": 1.0}
    assert demand.target == (2, 1) and demand.via is None


def test_unmapped_action(kitchen_world):
    with pytest.raises(UnmappedAction):
        subtask_requirement(PlanStep(0.0, "dance", ()), kitchen_world)


def test_world_invariants_enforced():
    with pytest.raises(WorldError):
        tiny_world(shelves=[{"id": "s", "cell": [0, 0], "capacity": 1,
                             "contents": {"p": 2}}])
    with pytest.raises(WorldError):
        tiny_world(grid={"width": 6, "height": 6, "blocked": [[0, 0]]})


def test_world_dict_round_trip(kitchen_world):
    assert load_world(kitchen_world.to_dict()).to_dict() == kitchen_world.to_dict()


def test_randomized_placements_are_reproducible(warehouse_domain):
    _, world, _ = load_task(warehouse_domain, 5)
    a, b = randomize_robots(world, 7), randomize_robots(world, 7)
    assert a.to_dict() == b.to_dict()
    cells = [r.cell for r in a.robots.values()]
    assert len(set(cells)) == len(cells) and all(a.grid.free(c) for c in cells)
    assert randomize_robots(world, 8).to_dict() != a.to_dict()


def test_contents_mirror_problem_init(warehouse_domain):
    problem, world, _ = load_task(warehouse_domain, 1)
    contents = contents_from_state(world, initial_state(problem).fluents)
    for sid, shelf in world.shelves.items():
        assert {p: n for p, n in contents[sid].items() if n} == \
            {p: n for p, n in shelf.contents.items() if n}


def _bfs(grid, a, b):
    seen, queue = {a: 0}, deque([a])
    while queue:
        x, y = cur = queue.popleft()
        for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if grid.free(nxt) and nxt not in seen:
                seen[nxt] = seen[cur] + 1
                queue.append(nxt)
    return seen.get(b, math.inf)


@settings(max_examples=60, deadline=None)
@given(blocked=st.sets(st.tuples(st.integers(0, 7), st.integers(0, 5)), max_size=18),
       a=st.tuples(st.integers(0, 7), st.integers(0, 5)),
       b=st.tuples(st.integers(0, 7), st.integers(0, 5)))
def test_grid_distance_matches_reference_bfs(blocked, a, b):
    blocked -= {a, b}
    grid = Grid(8, 6, blocked)
    d = grid.distance(a, b)
    assert d == _bfs(grid, a, b)
    path = grid.path(a, b)
    if d < math.inf:
        assert len(path) == d + 1 and path[0] == a and path[-1] == b
        assert all(grid.free(c) for c in path)
