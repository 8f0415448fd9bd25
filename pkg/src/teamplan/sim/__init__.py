from .execute import (
    DONE,
    FAILED,
    SKIPPED,
    ExecutionTrace,
    MetricsReport,
    Outcome,
    Segment,
    execute,
    metrics,
)
from .scheduler import (
    CyclicGraph,
    InfeasibleSubtask,
    Schedule,
    ScheduleEntry,
    SchedulingError,
    check_schedule,
    load_schedule,
    schedule,
    sequential_schedule,
)
from .world import (
    ActionMapping,
    Grid,
    RobotSpec,
    Shelf,
    SubtaskDemand,
    UnknownCell,
    UnknownRobot,
    UnmappedAction,
    World,
    WorldError,
    load_world,
    randomize_robots,
    route_length,
    subtask_requirement,
    travel_cost,
    warehouse_problem,
)
