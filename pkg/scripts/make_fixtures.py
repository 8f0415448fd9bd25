"""Regenerate the bundled warehouse worlds, problems and mock-generator fixtures.

Run from the repository root:  python3 scripts/make_fixtures.py
Outputs are committed; tests read them but never rewrite them.
"""

from __future__ import annotations

import json
from pathlib import Path

from teamplan.sim.world import load_world, warehouse_problem

DATA = Path(__file__).resolve().parents[1] / "src" / "teamplan" / "data"
WAREHOUSE = DATA / "warehouse"
MOCK = DATA / "mock"

WIDTH, HEIGHT = 30, 16
# shelf bodies are blocked; robots work from the access cell in front
SHELVES = {
    "shelf1": ((3, 1, 7, 2), (5, 3)),
    "shelf2": ((22, 1, 26, 2), (24, 3)),
    "shelf3": ((3, 13, 7, 14), (5, 12)),
    "shelf4": ((22, 13, 26, 14), (24, 12)),
}
PILLARS = [(10, 5, 11, 10), (18, 5, 19, 10)]
CARRY = [4, 3, 2, 4, 3, 2, 4, 3, 2, 4, 3, 2]

BASE = {
    "shelf1": {"product1": 9, "product2": 3, "product3": 2, "product4": 2},
    "shelf2": {"product1": 4, "product2": 5, "product3": 4, "product4": 3},
    "shelf3": {"product1": 5, "product2": 2, "product3": 6, "product4": 2},
    "shelf4": {"product1": 6, "product2": 2, "product3": 3, "product4": 1},
}
TASK5 = {
    "shelf1": {"product1": 14, "product2": 2},
    "shelf2": {"product1": 10, "product2": 3, "product3": 3},
    "shelf3": {"product1": 6, "product3": 4},
    "shelf4": {"product1": 10, "product4": 4},
}
# start state under which the nine-step fig4.plan (written by hand) is valid
FIG4 = {
    "shelf1": {"product1": 6, "product2": 2, "product3": 3},
    "shelf2": {"product1": 3, "product2": 2, "product3": 6},
    "shelf3": {"product1": 3, "product2": 6, "product3": 3},
    "shelf4": {"product1": 4, "product2": 4, "product3": 2},
}

TASKS = [
    {"id": 1, "command": "There should be 7 product 1 in shelf 3.",
     "goal": [["shelf3", "product1", 7]]},
    {"id": 2, "command": "There should be 3 product2 in shelf4, 5 product2 in shelf2.",
     "goal": [["shelf4", "product2", 3], ["shelf2", "product2", 5]]},
    {"id": 3, "command": "There should be 10 product1 in shelf3, 9 product1 in shelf2. "
                         "We can only use robot1 to move product to the shelf1",
     "goal": [["shelf3", "product1", 10], ["shelf2", "product1", 9]],
     "constraints": [{"kind": "forbid", "robot": f"robot{i}",
                      "pattern": "move-product * shelf1 * *"}
                     for i in range(12) if i != 1]},
    {"id": 4, "command": "There should be 2 product2, 7 product3, 8 product1 in shelf3, "
                         "3 product2, 5 product3, 12 product1 in shelf2.",
     "goal": [["shelf3", "product2", 2], ["shelf3", "product3", 7], ["shelf3", "product1", 8],
              ["shelf2", "product2", 3], ["shelf2", "product3", 5], ["shelf2", "product1", 12]]},
    {"id": 5, "command": "There should be 20 product1 in shelf2, 16 product1 in shelf4, "
                         "2 product1 in shelf3. But robot 0 should not be used to move "
                         "product1 from one shelf to another.",
     "contents": TASK5,
     "goal": [["shelf2", "product1", 20], ["shelf4", "product1", 16],
              ["shelf3", "product1", 2]],
     "constraints": [{"kind": "forbid", "robot": "robot0",
                      "pattern": "move-product * * product1 *"}]},
    {"id": 6, "command": "On shelf4, there oughta be 14 prodcut3, 2 prodcut1, and 1 prduct2.",
     "goal": [["shelf4", "product3", 14], ["shelf4", "product1", 2],
              ["shelf4", "product2", 1]],
     "misspelled": {"product3": "prodcut3"}},
    {"id": 7, "command": "Theyre supposed to be 17 prodct1 on shelve4, I think.",
     "goal": [["shelf4", "product1", 17]]},
    {"id": 8, "command": "shelf4 has ten plus seven product1",
     "goal": [["shelf4", "product1", 17]]},
    {"id": 9, "command": "shelf2 stocks a quartet of product2 and a trio of product3",
     "goal": [["shelf2", "product2", 4], ["shelf2", "product3", 3]]},
    {"id": 10, "command": "shelf4 stores a dozen product3 and a quintet of product1.",
     "goal": [["shelf4", "product3", 12], ["shelf4", "product1", 5]]},
]

FIG4_TASK = {
    "id": "fig4", "command": "There should be full of product 1 in shelf 1; full of product 2 "
                             "in shelf 2; full of product 3 in shelf 3; and shelf 4 should "
                             "be empty.",
    "contents": FIG4,
    "goal": [["shelf1", "product1", 16], ["shelf2", "product2", 14],
             ["shelf3", "product3", 14], ["shelf4", "product1", 0],
             ["shelf4", "product2", 0], ["shelf4", "product3", 0]],
}


def _rect(x0, y0, x1, y1):
    return [[x, y] for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)]


def base_world(contents) -> dict:
    blocked = []
    for body, _ in SHELVES.values():
        blocked += _rect(*body)
    for p in PILLARS:
        blocked += _rect(*p)
    depot = [(x, y) for y in (7, 8) for x in range(12, 18)]
    return {
        "grid": {"width": WIDTH, "height": HEIGHT, "blocked": sorted(blocked)},
        "shelves": [{"id": sid, "cell": list(access), "capacity": 20,
                     "contents": contents[sid]} for sid, (_, access) in SHELVES.items()],
        "landmarks": [{"id": "depot", "cell": [15, 8]}],
        "robots": [{"id": f"robot{i}", "cell": list(depot[i]),
                    "skills": {"carry": CARRY[i], "navigate": 1}} for i in range(12)],
        "actions": {"move-product": {"params": ["?from", "?to", "?p", "?m"],
                                     "fixed": {"navigate": 1},
                                     "scaled": {"carry": "(value-of ?m)"},
                                     "target": "?to", "via": "?from"}},
        "speed": 1.0,
        "duration": 1.0,
    }


def main() -> None:
    WAREHOUSE.mkdir(parents=True, exist_ok=True)
    MOCK.mkdir(parents=True, exist_ok=True)
    fixtures = {}
    index = []
    for task in [*TASKS, FIG4_TASK]:
        tid = task["id"]
        world_data = base_world(task.get("contents", BASE))
        (WAREHOUSE / f"task{tid}.world.json").write_text(json.dumps(world_data, indent=1) + "\n")
        world = load_world(world_data)
        goal = {(s, p): n for s, p, n in task["goal"]}
        text = warehouse_problem(world, goal, name=f"task{tid}")
        (WAREHOUSE / f"task{tid}.pddl").write_text(text)
        constraints = task.get("constraints", [])
        if constraints:
            (WAREHOUSE / f"task{tid}.constraints.json").write_text(
                json.dumps(constraints, indent=1) + "\n")
        index.append({"id": tid, "command": task["command"],
                      "world": f"task{tid}.world.json", "problem": f"task{tid}.pddl",
                      "constraints": f"task{tid}.constraints.json" if constraints else None,
                      "ground_truth_transitions": None})
        rounds = [f"../warehouse/task{tid}.pddl"]
        for wrong_from, wrong_to in task.get("misspelled", {}).items():
            bad = text.replace(f"(amount shelf4 {wrong_from})", f"(amount shelf4 {wrong_to})")
            (MOCK / f"task{tid}.round1.pddl").write_text(bad)
            rounds = [f"task{tid}.round1.pddl", *rounds]
        fixtures[task["command"]] = rounds
    (WAREHOUSE / "tasks.json").write_text(json.dumps(index, indent=1) + "\n")
    (MOCK / "warehouse.json").write_text(json.dumps(fixtures, indent=1) + "\n")


if __name__ == "__main__":
    main()
