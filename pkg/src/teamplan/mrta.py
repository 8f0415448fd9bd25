"""Skill-based coalition selection for a single subtask.

Given a skill matrix ``Q`` (skills x robots), a requirement ``Y`` and per-robot
costs ``c``, choose a binary vector ``x`` with ``Q @ x >= Y`` that minimises
``max_i c_i x_i`` first and ``sum_i c_i x_i`` second. Remaining ties go to the
lexicographically smallest ``x`` in robot order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

TOL = 1e-9
BRUTE_FORCE_LIMIT = 20


class AllocationError(Exception):
    pass


class DimensionMismatch(AllocationError, ValueError):
    pass


class InfeasibleConstraintSet(AllocationError):
    pass


class ConflictingFixings(InfeasibleConstraintSet):
    pass


class TooLarge(AllocationError):
    pass


# ── constraints ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Forbid:
    robot: object
    pattern: str = "*"


@dataclass(frozen=True)
class Require:
    robot: object
    pattern: str = "*"


@dataclass(frozen=True)
class MaxTeamSize:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("team size bound must be at least 1")


@dataclass(frozen=True)
class ForceValue:
    robot: object
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ValueError("forced value must be 0 or 1")


Constraint = Union[Forbid, Require, MaxTeamSize, ForceValue]


def _check_glob(pattern: str) -> None:
    depth = 0
    for ch in pattern:
        if ch == "[":
            depth += 1
        elif ch == "]" and depth:
            depth -= 1
    if depth:
        raise ValueError(f"unterminated character class in glob {pattern!r}")


def constraint_from_dict(d: Mapping) -> Constraint:
    kind = str(d.get("kind", "")).lower().replace("_", "-")
    if kind == "forbid":
        _check_glob(d.get("pattern", "*"))
        return Forbid(d["robot"], d.get("pattern", "*"))
    if kind == "require":
        _check_glob(d.get("pattern", "*"))
        return Require(d["robot"], d.get("pattern", "*"))
    if kind in ("max-team-size", "maxteamsize"):
        return MaxTeamSize(int(d["k"]))
    if kind in ("force-value", "forcevalue", "force"):
        return ForceValue(d["robot"], int(d["value"]))
    raise ValueError(f"unknown constraint kind {d.get('kind')!r}")


def constraint_to_dict(c: Constraint) -> dict:
    if isinstance(c, Forbid):
        return {"kind": "forbid", "robot": c.robot, "pattern": c.pattern}
    if isinstance(c, Require):
        return {"kind": "require", "robot": c.robot, "pattern": c.pattern}
    if isinstance(c, MaxTeamSize):
        return {"kind": "max-team-size", "k": c.k}
    return {"kind": "force-value", "robot": c.robot, "value": c.value}


def _normalise_action(action: str) -> str:
    return " ".join(action.strip().strip("()").lower().split())


def apply_constraints(constraints: Iterable[Constraint], action: str) -> list[ForceValue]:
    """Resolve Forbid/Require globs against one subtask into variable fixings.

    ``action`` is the ground action, with or without parentheses, e.g.
    ``"move-product shelf1 shelf2 product1 magnitude4"``. ForceValue entries
    pass through unchanged; MaxTeamSize is not a fixing and is skipped.
    """
    text = _normalise_action(action)
    fixed: dict[object, int] = {}
    for c in constraints:
        if isinstance(c, (Forbid, Require)):
            if not fnmatchcase(text, _normalise_action(c.pattern)):
                continue
            value = 0 if isinstance(c, Forbid) else 1
        elif isinstance(c, ForceValue):
            value = c.value
        else:
            continue
        robot = c.robot
        if fixed.get(robot, value) != value:
            raise ConflictingFixings(f"robot {robot!r} is both required and forbidden "
                                     f"for ({text})")
        fixed[robot] = value
    return [ForceValue(r, v) for r, v in fixed.items()]


# ── result ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Assignment:
    x: tuple[int, ...]
    max_cost: float
    sum_cost: float
    status: str = "optimal"
    robot_ids: tuple = field(default=(), compare=False)

    @property
    def objective(self) -> tuple[float, float]:
        return (self.max_cost, self.sum_cost)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def coalition(self) -> tuple:
        ids = self.robot_ids or tuple(range(len(self.x)))
        return tuple(r for r, xi in zip(ids, self.x) if xi)

    def to_dict(self) -> dict:
        ids = self.robot_ids or tuple(range(len(self.x)))
        return {
            "status": self.status,
            "x": {str(r): int(v) for r, v in zip(ids, self.x)},
            "max_cost": None if math.isinf(self.max_cost) else self.max_cost,
            "sum_cost": None if math.isinf(self.sum_cost) else self.sum_cost,
        }


def _infeasible(n: int, ids) -> Assignment:
    return Assignment((0,) * n, math.inf, math.inf, "infeasible", ids)


# ── input handling ───────────────────────────────────────────────────────────

@dataclass
class _Instance:
    Q: np.ndarray
    Y: np.ndarray
    c: np.ndarray
    ids: tuple
    fixed: dict[int, int]
    max_team: int


def _prepare(Q, Y, c, constraints, action, robot_ids) -> _Instance:
    Q = np.asarray(Q, dtype=float)
    Y = np.asarray(Y, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    if Q.ndim == 1:
        Q = Q.reshape(1, -1) if Y.size == 1 else Q.reshape(-1, 1)
    if Q.ndim != 2:
        raise DimensionMismatch("Q must be a 2-D skills x robots matrix")
    U, N = Q.shape
    if Y.size != U:
        raise DimensionMismatch(f"Q has {U} skill rows but Y has {Y.size} entries")
    if c.size != N:
        raise DimensionMismatch(f"Q has {N} robot columns but c has {c.size} entries")
    for name, arr in (("Q", Q), ("Y", Y), ("c", c)):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} must be finite")
        if np.any(arr < 0):
            raise ValueError(f"{name} must be non-negative")
    ids = tuple(robot_ids) if robot_ids is not None else tuple(range(N))
    if len(ids) != N or len(set(ids)) != N:
        raise DimensionMismatch("robot ids must be unique, one per column of Q")
    pos = {r: i for i, r in enumerate(ids)}
    constraints = list(constraints or ())
    fixed: dict[int, int] = {}
    for f in apply_constraints(constraints, action or ""):
        if f.robot not in pos:
            raise AllocationError(f"constraint names unknown robot {f.robot!r}")
        fixed[pos[f.robot]] = f.value
    max_team = N
    for k in constraints:
        if isinstance(k, MaxTeamSize):
            max_team = min(max_team, k.k)
    return _Instance(Q, Y, c, ids, fixed, max_team)


def _objective(x: Sequence[int], c: np.ndarray) -> tuple[float, float]:
    chosen = [float(c[i]) for i, v in enumerate(x) if v]
    return (max(chosen, default=0.0), float(sum(chosen)))


# ── exact solver ─────────────────────────────────────────────────────────────

def solve(Q, Y, c, constraints: Iterable[Constraint] = (), *, action: str = "",
          robot_ids: Sequence | None = None) -> Assignment:
    """Lexicographic optimum of (max cost, total cost) over feasible coalitions.

    Sweeps candidate max-cost thresholds in ascending order; at each one a
    depth-first branch and bound finds the cheapest covering coalition among
    robots no more expensive than the threshold. The first threshold with a
    feasible coalition is optimal for the first objective.
    """
    inst = _prepare(Q, Y, c, constraints, action, robot_ids)
    U, N = inst.Q.shape
    need = inst.Y
    forced_on = sorted(i for i, v in inst.fixed.items() if v == 1)
    if len(forced_on) > inst.max_team:
        return _infeasible(N, inst.ids)
    floor = max((inst.c[i] for i in forced_on), default=0.0)

    thresholds: list[float] = []
    for value in sorted({0.0, *map(float, inst.c)}):
        if value + TOL < floor:
            continue
        if thresholds and value - thresholds[-1] <= TOL:
            continue
        thresholds.append(value)

    for t in thresholds:
        allowed = [i for i in range(N)
                   if inst.fixed.get(i) != 0 and inst.c[i] <= t + TOL]
        best = _min_sum_cover(inst, allowed, forced_on)
        if best is not None:
            x = tuple(best)
            mx, sm = _objective(x, inst.c)
            return Assignment(x, mx, sm, "optimal", inst.ids)
    return _infeasible(N, inst.ids)


def _min_sum_cover(inst: _Instance, allowed: list[int], forced_on: list[int]):
    """Cheapest x over ``allowed`` robots covering Y; lexicographically smallest on ties."""
    Q, c = inst.Q, inst.c
    U, N = Q.shape
    if any(i not in allowed for i in forced_on):
        return None
    free = [i for i in allowed if i not in forced_on]
    order = sorted(set(free) | set(forced_on))
    forced = set(forced_on)
    # suffix sums of remaining capability for feasibility pruning
    suffix = np.zeros((len(order) + 1, U))
    for k in range(len(order) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + Q[:, order[k]]
    if np.any(suffix[0] + TOL < inst.Y):
        return None

    best_sum = math.inf
    best_x: list[int] | None = None
    x = [0] * N

    def dfs(k: int, have: np.ndarray, total: float, count: int) -> None:
        nonlocal best_sum, best_x
        if total >= best_sum - TOL or count > inst.max_team:
            return
        if np.all(have + TOL >= inst.Y):
            rest_forced = [order[j] for j in range(k, len(order)) if order[j] in forced]
            extra = sum(c[i] for i in rest_forced)
            if count + len(rest_forced) <= inst.max_team and total + extra < best_sum - TOL:
                for i in rest_forced:
                    x[i] = 1
                best_sum = total + extra
                best_x = list(x)
                for i in rest_forced:
                    x[i] = 0
            return
        if k == len(order):
            return
        if np.any(have + suffix[k] + TOL < inst.Y):
            return
        i = order[k]
        if i not in forced:
            dfs(k + 1, have, total, count)
        x[i] = 1
        dfs(k + 1, have + Q[:, i], total + c[i], count + 1)
        x[i] = 0

    dfs(0, np.zeros(U), 0.0, 0)
    return best_x


# ── oracle ───────────────────────────────────────────────────────────────────

def brute_force(Q, Y, c, constraints: Iterable[Constraint] = (), *, action: str = "",
                robot_ids: Sequence | None = None) -> Assignment:
    """Exhaustive enumeration of all 2^N coalitions, same contract as ``solve``."""
    inst = _prepare(Q, Y, c, constraints, action, robot_ids)
    U, N = inst.Q.shape
    if N > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force supports at most {BRUTE_FORCE_LIMIT} robots, got {N}")
    masks = np.arange(2 ** N, dtype=np.int64)
    # column i holds x_i; x_0 is the most significant bit so ascending masks
    # enumerate vectors in lexicographic order
    X = ((masks[:, None] >> np.arange(N - 1, -1, -1)) & 1).astype(np.int8)
    ok = np.all(X.astype(float) @ inst.Q.T + TOL >= inst.Y, axis=1)
    for i, v in inst.fixed.items():
        ok &= X[:, i] == v
    ok &= X.sum(axis=1) <= inst.max_team
    if not ok.any():
        return _infeasible(N, inst.ids)
    costs = X * inst.c
    mx = costs.max(axis=1) if N else np.zeros(len(masks))
    sm = costs.sum(axis=1)
    best_max = mx[ok].min()
    cand = ok & (mx <= best_max + TOL)
    best_sum = sm[cand].min()
    cand &= sm <= best_sum + TOL
    first = int(np.flatnonzero(cand)[0])
    x = tuple(int(v) for v in X[first])
    m, s = _objective(x, inst.c)
    return Assignment(x, m, s, "optimal", inst.ids)


# ── instance files ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class AllocationInstance:
    robot_ids: tuple
    skill_names: tuple[str, ...]
    Q: np.ndarray = field(compare=False)
    Y: np.ndarray = field(compare=False)
    c: np.ndarray = field(compare=False)
    constraints: tuple = ()
    action: str = ""

    def solve(self) -> Assignment:
        return solve(self.Q, self.Y, self.c, self.constraints, action=self.action,
                     robot_ids=self.robot_ids)


def skill_matrix(robot_skills: Mapping[object, Mapping[str, float]],
                 requirement: Mapping[str, float]) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    """Stack robot skill dictionaries into ``Q`` with rows in sorted skill order."""
    names = sorted({s for skills in robot_skills.values() for s in skills} | set(requirement))
    Q = np.array([[float(skills.get(s, 0.0)) for skills in robot_skills.values()]
                  for s in names], dtype=float).reshape(len(names), len(robot_skills))
    Y = np.array([float(requirement.get(s, 0.0)) for s in names], dtype=float)
    return tuple(names), Q, Y


def instance_from_dict(data: Mapping) -> AllocationInstance:
    robots = data.get("robots", [])
    ids = tuple(r["id"] for r in robots)
    names, Q, Y = skill_matrix({r["id"]: r.get("skills", {}) for r in robots},
                               data.get("requirement", {}))
    c = np.array([float(r.get("cost", 0.0)) for r in robots], dtype=float)
    constraints = tuple(constraint_from_dict(k) for k in data.get("constraints", []))
    action = data.get("action", "")
    return AllocationInstance(ids, names, Q, Y, c, constraints, action)

