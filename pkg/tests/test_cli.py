import json
import subprocess
import sys
from pathlib import Path

import pytest

from teamplan import data_path
from teamplan.cli import main

from conftest import two_shelf_problem

GOLDEN = Path(__file__).parent / "golden"
DOMAIN = str(data_path("domains", "inventory-management.pddl"))
KITCHEN = str(data_path("domains", "kitchen.pddl"))
FRIDGE = str(data_path("kitchen", "fridge.pddl"))
FRIDGE_PLAN = str(data_path("kitchen", "fridge.plan"))
FRIDGE_WORLD = str(data_path("kitchen", "fridge.world.json"))
CONFIG = str(data_path("mock", "config.json"))
TASK1 = "There should be 7 product 1 in shelf 3."


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_graph_dot_matches_golden(capsys):
    code, out, _ = run(capsys, "graph", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", FRIDGE_PLAN, "--mode", "dag")
    assert code == 0 and out == (GOLDEN / "fridge_dag.dot").read_text()


def test_parse_reports_counts(capsys):
    code, out, _ = run(capsys, "parse", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", FRIDGE_PLAN)
    data = json.loads(out)
    assert code == 0 and data["plan_steps"] == 6 and data["actions"] == 3


def test_validate_and_invalid_plan(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", FRIDGE_PLAN)
    assert code == 0 and json.loads(out)["valid"] is True
    bad = tmp_path / "bad.plan"
    bad.write_text("0.0: (closeobject fridge1)\n")
    code, out, _ = run(capsys, "validate", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", str(bad))
    assert code == 6 and json.loads(out)["first_failure"] == 0


def test_plan_writes_plan_file(capsys, tmp_path):
    target = tmp_path / "out.plan"
    code, _, _ = run(capsys, "plan", "--domain", KITCHEN, "--problem", FRIDGE,
                     "--out", str(target))
    assert code == 0
    code, out, _ = run(capsys, "validate", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", str(target))
    assert code == 0


def test_allocate_single_robot(capsys, tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({"robots": [{"id": "r0", "skills": {"carry": 1}, "cost": 5}],
                                "requirement": {"carry": 1}}))
    code, out, _ = run(capsys, "allocate", str(inst))
    assert code == 0
    assert json.loads(out) == {"status": "optimal", "x": {"r0": 1},
                               "max_cost": 5.0, "sum_cost": 5.0}
    inst.write_text(json.dumps({"robots": [{"id": "r0", "skills": {"carry": 1}, "cost": 5}],
                                "requirement": {"carry": 2}}))
    code, out, _ = run(capsys, "allocate", str(inst))
    assert code == 4 and json.loads(out)["status"] == "infeasible"


def test_schedule_and_simulate(capsys):
    code, out, _ = run(capsys, "schedule", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", FRIDGE_PLAN, "--world", FRIDGE_WORLD)
    assert code == 0 and out.splitlines()[0] == "subtask 0 coalition robot0 start 0.0 end 8.0"
    code, out, _ = run(capsys, "simulate", "--domain", KITCHEN, "--problem", FRIDGE,
                       "--plan", FRIDGE_PLAN, "--world", FRIDGE_WORLD)
    assert code == 0 and "SR=1" in out.splitlines()
    # robot0: 7 to fridge1, 8 to table1, 8 back; robot1: 7 to fridge2, 9 and 9
    lines = out.splitlines()
    assert "travel robot0 23" in lines and "travel robot1 25" in lines
    assert "TC_max=25" in lines and "TC_avg=24" in lines


def test_pipeline_task1(capsys):
    world = str(data_path("warehouse", "task1.world.json"))
    code, out, _ = run(capsys, "pipeline", "--command", TASK1, "--config", CONFIG,
                       "--domain", DOMAIN, "--world", world,
                       "--problem", str(data_path("warehouse", "task1.pddl")))
    report = json.loads(out)
    assert code == 0 and report["exit_code"] == 0
    assert report["metrics"]["SR"] == 1 and report["schedule"]


def test_pipeline_unknown_command_is_generator_failure(capsys):
    world = str(data_path("warehouse", "task1.world.json"))
    code, out, _ = run(capsys, "pipeline", "--command", "Bake a cake.", "--config", CONFIG,
                       "--domain", DOMAIN, "--world", world)
    assert code == 5 and json.loads(out)["stage"]


@pytest.mark.parametrize("argv, expected", [
    (["graph", "--domain", KITCHEN, "--plan", FRIDGE_PLAN], 64),      # missing --problem
    (["graph", "--domain", "nope.pddl", "--problem", FRIDGE, "--plan", FRIDGE_PLAN], 64),
    (["frobnicate"], 64),
])
def test_usage_errors(capsys, argv, expected):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == expected


def test_parse_error_exit_code(capsys, tmp_path):
    broken = tmp_path / "broken.pddl"
    broken.write_text("(define (problem p)")
    code, _, err = run(capsys, "parse", "--domain", KITCHEN, "--problem", str(broken))
    assert code == 2 and "parse error" in err


def test_unsolvable_exit_code(capsys, tmp_path):
    p = tmp_path / "p.pddl"
    p.write_text(two_shelf_problem(2, 3))
    code, _, _ = run(capsys, "plan", "--domain", DOMAIN, "--problem", str(p))
    assert code == 3


def test_console_script_is_deterministic():
    world = str(data_path("warehouse", "task5.world.json"))
    cmd = [sys.executable, "-m", "teamplan.cli", "pipeline", "--command",
           "There should be 20 product1 in shelf2, 16 product1 in shelf4, 2 product1 in "
           "shelf3. But robot 0 should not be used to move product1 from one shelf to another.",
           "--config", CONFIG, "--domain", DOMAIN, "--world", world,
           "--constraints", str(data_path("warehouse", "task5.constraints.json"))]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout
