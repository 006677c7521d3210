"""定数モジュール"""

from .levels import (
    LEVEL_REGISTRY,
    MISSION_FAMILIES,
    MISSION_GOTO,
    MISSION_PICKUP,
    MISSION_OPEN,
    MISSION_PUTNEXT,
    MISSION_UNLOCK_PICKUP,
    MAX_STEPS_FACTOR,
    GENERATOR_MAX_RETRIES,
    # 参考値
    REFERENCE_DEMO_STATS,
    REFERENCE_RANDOM_WALK,
)
from .defaults import (
    DEFAULT_HYPERPARAMS,
    DEFAULT_SCHEDULER,
    DEFAULT_RUN,
    SCHEDULER_MODES,
    TSCL_VARIANTS,
    RUN_MODES,
    ACCURACY_TARGETS,
    RANDOM_WALK_TRIALS,
    RANDOM_WALK_LEN,
)

__all__ = [
    "LEVEL_REGISTRY",
    "MISSION_FAMILIES",
    "MISSION_GOTO",
    "MISSION_PICKUP",
    "MISSION_OPEN",
    "MISSION_PUTNEXT",
    "MISSION_UNLOCK_PICKUP",
    "MAX_STEPS_FACTOR",
    "GENERATOR_MAX_RETRIES",
    # 参考値
    "REFERENCE_DEMO_STATS",
    "REFERENCE_RANDOM_WALK",
    # 既定値
    "DEFAULT_HYPERPARAMS",
    "DEFAULT_SCHEDULER",
    "DEFAULT_RUN",
    "SCHEDULER_MODES",
    "TSCL_VARIANTS",
    "RUN_MODES",
    "ACCURACY_TARGETS",
    "RANDOM_WALK_TRIALS",
    "RANDOM_WALK_LEN",
]
