"""グリッドワールドモジュール"""

from .objects import (
    Action,
    Cell,
    Color,
    Direction,
    DoorState,
    N_ACTIONS,
    ObjectType,
)
from .state import AgentPose, GridState, Mission, Task
from .rules import is_terminal, success_predicate
from .levels import LevelSpec, LevelGenerator, get_level, list_levels, cached_level
from .env import (
    GridWorldEnv,
    Observation,
    VIEW_SIZE,
    compute_reward,
    observe,
    replay,
    replay_by_id,
    reset,
    step,
    transition,
)

__all__ = [
    "Action",
    "Cell",
    "Color",
    "Direction",
    "DoorState",
    "N_ACTIONS",
    "ObjectType",
    "AgentPose",
    "GridState",
    "Mission",
    "Task",
    "is_terminal",
    "success_predicate",
    "LevelSpec",
    "LevelGenerator",
    "get_level",
    "list_levels",
    "cached_level",
    "GridWorldEnv",
    "Observation",
    "VIEW_SIZE",
    "compute_reward",
    "observe",
    "replay",
    "replay_by_id",
    "reset",
    "step",
    "transition",
]
