"""
RCPPO: 逆順カリキュラムつき PPO

エキスパートのデモをゴール側から切り出して開始状態のカリキュラムを作り、
疎な報酬しかない格子世界のタスクを PPO で学習するプログラム
"""

from .errors import (
    RCPPOError,
    UsageError,
    ConstructionError,
    ReplayError,
    PlanningError,
    UnsolvableInstanceError,
    EmptyStageError,
    NumericError,
    CorruptFileError,
)
from .gridworld import GridState, LevelSpec, Mission, get_level, list_levels, reset, step, replay, observe
from .expert import Demo, DemoSet, ExpertBot, gen_demos, read_demos, write_demos
from .curriculum import (
    CombinePlan,
    Curriculum,
    StartState,
    build_from_demos,
    build_random_walk,
    combine_stages,
    sample_start,
)
from .scheduler import CurriculumScheduler, SchedulerConfig
from .neuralpolicy import PolicyParams, init_params, load_params, save_params
from .trainer import HyperParams, Trainer, TrainingLog, gae, ppo_update, train
from .metrics import EvalReport, RunSummary, eval_success_rate, frames_to_accuracy, random_walk_goal_rate
from .config import RunConfig

__all__ = [
    # エラー
    "RCPPOError",
    "UsageError",
    "ConstructionError",
    "ReplayError",
    "PlanningError",
    "UnsolvableInstanceError",
    "EmptyStageError",
    "NumericError",
    "CorruptFileError",
    # 格子世界
    "GridState",
    "LevelSpec",
    "Mission",
    "get_level",
    "list_levels",
    "reset",
    "step",
    "replay",
    "observe",
    # デモ
    "Demo",
    "DemoSet",
    "ExpertBot",
    "gen_demos",
    "read_demos",
    "write_demos",
    # カリキュラム
    "CombinePlan",
    "Curriculum",
    "StartState",
    "build_from_demos",
    "build_random_walk",
    "combine_stages",
    "sample_start",
    "CurriculumScheduler",
    "SchedulerConfig",
    # 学習
    "PolicyParams",
    "init_params",
    "load_params",
    "save_params",
    "HyperParams",
    "Trainer",
    "TrainingLog",
    "gae",
    "ppo_update",
    "train",
    # 評価
    "EvalReport",
    "RunSummary",
    "eval_success_rate",
    "frames_to_accuracy",
    "random_walk_goal_rate",
    "RunConfig",
]
__version__ = "1.0.0"
