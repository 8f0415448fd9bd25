"""Grid warehouse world: layout, robots, travel distances and subtask demands."""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from ..pddl.model import Expr
from ..pddl.parser import parse_expr
from ..pddl.printer import format_expr
from ..pddl.sexpr import read_all
from ..pddl.state import evaluate, substitute

Cell = tuple[int, int]
UNREACHABLE = math.inf


class WorldError(Exception):
    pass


class UnknownRobot(WorldError, KeyError):
    pass


class UnknownCell(WorldError, KeyError):
    pass


class UnmappedAction(WorldError):
    pass


@dataclass(frozen=True)
class RobotSpec:
    id: str
    cell: Cell
    skills: Mapping[str, float]
    travel: float = 0.0


@dataclass(frozen=True)
class Shelf:
    id: str
    cell: Cell
    capacity: int
    contents: Mapping[str, int] = field(default_factory=dict)

    @property
    def load(self) -> int:
        return sum(self.contents.values())


@dataclass(frozen=True)
class ActionMapping:
    """How a team action turns into skill demands and a place to go.

    ``params`` names the action's parameters in order, ``fixed`` demands are
    constant and ``scaled`` demands are numeric expressions over the action's
    parameters (e.g. ``(value-of ?m)``). A scaled demand of zero makes the
    whole subtask a no-op with an empty requirement.
    """
    params: tuple[str, ...]
    fixed: Mapping[str, float] = field(default_factory=dict)
    scaled: Mapping[str, Expr] = field(default_factory=dict)
    target: str | None = None
    via: str | None = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "ActionMapping":
        scaled = {k: parse_expr(read_all(str(v))[0]) for k, v in d.get("scaled", {}).items()}
        return cls(
            params=tuple(p.lower() for p in d.get("params", [])),
            fixed={k: float(v) for k, v in d.get("fixed", {}).items()},
            scaled=scaled,
            target=d.get("target"),
            via=d.get("via"),
        )


@dataclass(frozen=True)
class SubtaskDemand:
    requirement: Mapping[str, float]
    target: Cell | None
    via: Cell | None = None


class Grid:
    """4-connected grid with cached breadth-first distance maps."""

    def __init__(self, width: int, height: int, blocked=()):
        self.width = width
        self.height = height
        self.blocked = frozenset(tuple(c) for c in blocked)
        self._dist: dict[Cell, dict[Cell, int]] = {}
        self._parent: dict[Cell, dict[Cell, Cell]] = {}

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and (self.width, self.height, self.blocked) == \
            (other.width, other.height, other.blocked)

    def __hash__(self) -> int:
        return hash((self.width, self.height, self.blocked))

    def inside(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def free(self, cell: Cell) -> bool:
        return self.inside(cell) and tuple(cell) not in self.blocked

    def _bfs(self, source: Cell) -> None:
        dist = {source: 0}
        parent: dict[Cell, Cell] = {}
        queue = deque([source])
        while queue:
            x, y = cur = queue.popleft()
            for nxt in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if nxt not in dist and self.free(nxt):
                    dist[nxt] = dist[cur] + 1
                    parent[nxt] = cur
                    queue.append(nxt)
        self._dist[source] = dist
        self._parent[source] = parent

    def distance(self, a: Cell, b: Cell) -> float:
        a, b = tuple(a), tuple(b)
        for c in (a, b):
            if not self.inside(c):
                raise UnknownCell(c)
        if a not in self._dist:
            self._bfs(a)
        return self._dist[a].get(b, UNREACHABLE)

    def path(self, a: Cell, b: Cell) -> list[Cell]:
        """Cells from ``a`` to ``b`` inclusive; empty if unreachable."""
        a, b = tuple(a), tuple(b)
        if math.isinf(self.distance(a, b)):
            return []
        parent = self._parent[a]
        out = [b]
        while out[-1] != a:
            out.append(parent[out[-1]])
        out.reverse()
        return out


@dataclass(frozen=True)
class World:
    grid: Grid
    shelves: Mapping[str, Shelf]
    robots: Mapping[str, RobotSpec]
    landmarks: Mapping[str, Cell] = field(default_factory=dict)
    actions: Mapping[str, ActionMapping] = field(default_factory=dict)
    speed: float = 1.0
    duration: float = 1.0

    def __post_init__(self):
        for s in self.shelves.values():
            if s.load > s.capacity:
                raise WorldError(f"{s.id} holds {s.load} items but capacity is {s.capacity}")
            if any(v < 0 for v in s.contents.values()):
                raise WorldError(f"{s.id} has a negative product count")
            if not self.grid.free(s.cell):
                raise WorldError(f"{s.id} access cell {s.cell} is blocked or outside the grid")
        for r in self.robots.values():
            if not self.grid.free(r.cell):
                raise WorldError(f"robot {r.id} starts on blocked cell {r.cell}")
            if any(v < 0 for v in r.skills.values()):
                raise WorldError(f"robot {r.id} has a negative skill level")
        names = list(self.shelves) + list(self.landmarks)
        if len(set(names)) != len(names):
            raise WorldError("shelf and landmark ids must be unique")
        if self.speed <= 0 or self.duration < 0:
            raise WorldError("speed must be positive and duration non-negative")

    @property
    def robot_ids(self) -> tuple[str, ...]:
        return tuple(self.robots)

    def location(self, name: str) -> Cell:
        if name in self.shelves:
            return self.shelves[name].cell
        if name in self.landmarks:
            return self.landmarks[name]
        raise UnknownCell(name)

    def with_robots(self, robots: Mapping[str, RobotSpec]) -> "World":
        return replace(self, robots=dict(robots))

    def with_contents(self, contents: Mapping[str, Mapping[str, int]]) -> "World":
        shelves = {sid: replace(s, contents=dict(contents.get(sid, s.contents)))
                   for sid, s in self.shelves.items()}
        return replace(self, shelves=shelves)

    # ── (de)serialisation ────────────────────────────────────────────────────

    @classmethod
    def from_dict(cls, data: Mapping) -> "World":
        g = data.get("grid", {})
        grid = Grid(int(g["width"]), int(g["height"]), [tuple(c) for c in g.get("blocked", [])])
        shelves = {}
        for s in data.get("shelves", []):
            shelves[s["id"]] = Shelf(s["id"], tuple(s["cell"]), int(s["capacity"]),
                                     {k: int(v) for k, v in s.get("contents", {}).items()})
        robots = {}
        for r in data.get("robots", []):
            if r["id"] in robots:
                raise WorldError(f"duplicate robot id {r['id']}")
            robots[r["id"]] = RobotSpec(r["id"], tuple(r["cell"]),
                                        {k: float(v) for k, v in r.get("skills", {}).items()},
                                        float(r.get("travel", 0.0)))
        landmarks = {m["id"]: tuple(m["cell"]) for m in data.get("landmarks", [])}
        actions = {name.lower(): ActionMapping.from_dict(spec)
                   for name, spec in data.get("actions", {}).items()}
        return cls(grid, shelves, robots, landmarks, actions,
                   float(data.get("speed", 1.0)), float(data.get("duration", 1.0)))

    def to_dict(self) -> dict:
        return {
            "grid": {"width": self.grid.width, "height": self.grid.height,
                     "blocked": [list(c) for c in sorted(self.grid.blocked)]},
            "shelves": [{"id": s.id, "cell": list(s.cell), "capacity": s.capacity,
                         "contents": dict(s.contents)} for s in self.shelves.values()],
            "landmarks": [{"id": k, "cell": list(v)} for k, v in self.landmarks.items()],
            "robots": [{"id": r.id, "cell": list(r.cell), "skills": dict(r.skills)}
                       for r in self.robots.values()],
            "actions": {name: {"params": list(m.params), "fixed": dict(m.fixed),
                               "scaled": {k: format_expr(v) for k, v in m.scaled.items()},
                               "target": m.target, "via": m.via}
                        for name, m in self.actions.items()},
            "speed": self.speed,
            "duration": self.duration,
        }


def load_world(source) -> World:
    if isinstance(source, Mapping):
        return World.from_dict(source)
    return World.from_dict(json.loads(Path(source).read_text()))


def randomize_robots(world: World, seed: int) -> World:
    """Same robots on distinct random free cells, reproducible from ``seed``."""
    rng = random.Random(seed)
    occupied = {s.cell for s in world.shelves.values()} | set(world.landmarks.values())
    cells = [(x, y) for y in range(world.grid.height) for x in range(world.grid.width)
             if world.grid.free((x, y)) and (x, y) not in occupied]
    picks = rng.sample(cells, len(world.robots))
    return world.with_robots({rid: replace(r, cell=cell, travel=0.0)
                              for (rid, r), cell in zip(world.robots.items(), picks)})


# ── queries ──────────────────────────────────────────────────────────────────

def travel_cost(world: World, robot_id: str, target: Cell, via: Cell | None = None) -> float:
    """Shortest 4-connected path length from the robot's cell (through ``via``)."""
    if robot_id not in world.robots:
        raise UnknownRobot(robot_id)
    return route_length(world.grid, world.robots[robot_id].cell, target, via)


def route_length(grid: Grid, start: Cell, target: Cell, via: Cell | None = None) -> float:
    if not grid.inside(tuple(target)):
        raise UnknownCell(target)
    if via is None:
        return grid.distance(start, target)
    return grid.distance(start, via) + grid.distance(via, target)


def subtask_requirement(action, world: World, fluents: Mapping | None = None) -> SubtaskDemand:
    """Skill demands and destination of one team action.

    ``action`` is anything with ``name`` and ``args`` (a ground action, plan
    step or graph node). ``fluents`` supplies values for scaled demands.
    """
    mapping = world.actions.get(action.name)
    if mapping is None:
        raise UnmappedAction(f"no skill mapping for action '{action.name}'")
    if len(mapping.params) != len(action.args):
        raise UnmappedAction(f"skill mapping for '{action.name}' lists {len(mapping.params)} "
                             f"parameters, action has {len(action.args)}")
    binding = dict(zip(mapping.params, action.args))
    demand: dict[str, float] = {k: v for k, v in mapping.fixed.items() if v > 0}
    for skill, expr in mapping.scaled.items():
        value = float(evaluate(substitute(expr, binding), fluents or {}))
        if value <= 0:
            demand = {}
            break
        demand[skill] = max(demand.get(skill, 0.0), value)
    target = world.location(binding[mapping.target]) if mapping.target else None
    via = world.location(binding[mapping.via]) if mapping.via else None
    return SubtaskDemand(demand, target, via)


# ── warehouse problem text ───────────────────────────────────────────────────

def shelf_products(world: World, products=()) -> list[str]:
    names = set(products)
    for s in world.shelves.values():
        names.update(s.contents)
    return sorted(names, key=_natural)


def _natural(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1)


def warehouse_problem(world: World, goal: Mapping[tuple[str, str], int], *,
                      name: str = "task", magnitudes=range(1, 7), products=(),
                      extra_goal: str = "") -> str:
    """Problem text for the inventory domain mirroring the world's shelf contents."""
    shelves = sorted(world.shelves, key=_natural)
    prods = shelf_products(world, products)
    mags = [f"magnitude{m}" for m in magnitudes]
    lines = [f"(define (problem {name})", "  (:domain inventory-management)",
             "  (:objects",
             f"    {' '.join(shelves)} - shelf",
             f"    {' '.join(prods)} - product",
             f"    {' '.join(mags)} - magnitude)",
             "  (:init"]
    for s in shelves:
        for t in shelves:
            if s != t:
                lines.append(f"    (different-shelves {s} {t})")
    for s in shelves:
        shelf = world.shelves[s]
        for p in prods:
            if shelf.contents.get(p, 0) > 0:
                lines.append(f"    (has-product {s} {p})")
    for s in shelves:
        shelf = world.shelves[s]
        for p in prods:
            lines.append(f"    (= (amount {s} {p}) {shelf.contents.get(p, 0)})")
        lines.append(f"    (= (free-space {s}) {shelf.capacity - shelf.load})")
    for m, label in zip(magnitudes, mags):
        lines.append(f"    (= (value-of {label}) {m})")
    lines[-1] += ")"
    conj = [f"(= (amount {s} {p}) {v})" for (s, p), v in goal.items()]
    if extra_goal:
        conj.append(extra_goal)
    lines.append("  (:goal (and " + "\n              ".join(conj) + ")))")
    return "\n".join(lines) + "\n"


def contents_from_state(world: World, fluents: Mapping) -> dict[str, dict[str, int]]:
    """Read ``amount`` fluents back into per-shelf product counts."""
    out: dict[str, dict[str, int]] = {sid: {} for sid in world.shelves}
    for key, value in fluents.items():
        if key[0] == "amount" and len(key) == 3 and key[1] in out:
            out[key[1]][key[2]] = int(value)
    return out
