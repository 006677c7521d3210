"""
状態の型

エージェントの姿勢・ミッション・ワールド全体のスナップショット
"""

from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..errors import UsageError
from .objects import (
    Cell,
    Color,
    Direction,
    ObjectDesc,
    ObjectType,
    PORTABLE,
    desc_name,
)

Position = Tuple[int, int]


class Task(IntEnum):
    GOTO = 0
    PICKUP = 1
    OPEN = 2
    PUTNEXT = 3
    UNLOCK_PICKUP = 4


# ミッション文のテンプレート
MISSION_TEMPLATES = {
    Task.GOTO: "go to the {target}",
    Task.PICKUP: "pick up the {target}",
    Task.OPEN: "open the {target}",
    Task.PUTNEXT: "put the {target} next to the {second}",
    Task.UNLOCK_PICKUP: "pick up the {target}",
}

MISSION_CODE_SIZE = 5


@dataclass(frozen=True)
class AgentPose:
    """エージェントの位置・向き・所持品"""
    position: Position
    direction: Direction
    carrying: Optional[ObjectDesc] = None


@dataclass(frozen=True)
class Mission:
    """テンプレート構造のミッション（タスク, ターゲット, 第2ターゲット）"""
    task: Task
    target: ObjectDesc
    second_target: Optional[ObjectDesc] = None

    def __post_init__(self):
        if (self.second_target is not None) != (self.task == Task.PUTNEXT):
            raise UsageError("second_target は PutNext のときのみ必要")
        if (self.target[0] == ObjectType.DOOR) != (self.task == Task.OPEN):
            raise UsageError("ドアをターゲットにできるのは Open のみ")

    def describe(self) -> str:
        """ミッション文（英語テンプレート）"""
        second = desc_name(self.second_target) if self.second_target else ""
        return MISSION_TEMPLATES[self.task].format(target=desc_name(self.target), second=second)

    def encode(self) -> np.ndarray:
        """(task, 対象, 対象色, 第2対象, 第2対象色) の整数ベクトル"""
        second = self.second_target or (ObjectType.EMPTY, Color.NONE)
        return np.array(
            [self.task, self.target[0], self.target[1], second[0], second[1]],
            dtype=np.int64,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "task": self.task.name.lower(),
            "target": [self.target[0].name.lower(), self.target[1].name.lower()],
            "text": self.describe(),
        }
        if self.second_target is not None:
            data["second_target"] = [
                self.second_target[0].name.lower(),
                self.second_target[1].name.lower(),
            ]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Mission":
        def _desc(pair) -> ObjectDesc:
            return (ObjectType[pair[0].upper()], Color[pair[1].upper()])

        second = data.get("second_target")
        return cls(
            task=Task[data["task"].upper()],
            target=_desc(data["target"]),
            second_target=_desc(second) if second else None,
        )


@dataclass(frozen=True, eq=False)
class GridState:
    """
    ワールドの完全なスナップショット

    grid は (H, W, 3) の整数配列で [y, x] で参照する。
    状態は値として扱い、遷移のたびに新しいインスタンスを作る。
    history はリセット以降に適用した行動列で、(level_id, seed, history) から
    状態を再構築できる。
    """
    grid: np.ndarray
    agent: AgentPose
    mission: Mission
    steps_taken: int
    max_steps: int
    level_id: str
    seed: int
    history: Tuple[int, ...] = field(default=())

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def in_bounds(self, pos: Position) -> bool:
        x, y = pos
        return 0 <= x < self.width and 0 <= y < self.height

    def cell(self, pos: Position) -> Cell:
        x, y = pos
        return Cell.from_codes(self.grid[y, x])

    def object_at(self, pos: Position) -> ObjectType:
        x, y = pos
        return ObjectType(int(self.grid[y, x, 0]))

    @property
    def front_pos(self) -> Position:
        dx, dy = self.agent.direction.vector
        x, y = self.agent.position
        return (x + dx, y + dy)

    def front_cell(self) -> Cell:
        return self.cell(self.front_pos)

    def find(self, desc: ObjectDesc) -> Tuple[Position, ...]:
        """グリッド上で desc に一致するオブジェクトの位置（所持品は含まない）"""
        obj_type, color = desc
        ys, xs = np.nonzero((self.grid[..., 0] == obj_type) & (self.grid[..., 1] == color))
        return tuple((int(x), int(y)) for y, x in zip(ys, xs))

    def object_census(self) -> Dict[ObjectDesc, int]:
        """持ち運べるオブジェクトの個数（グリッド上＋所持品）"""
        census: Dict[ObjectDesc, int] = {}
        objs = self.grid[..., 0]
        mask = np.isin(objs, [int(t) for t in PORTABLE])
        for y, x in zip(*np.nonzero(mask)):
            desc = (ObjectType(int(objs[y, x])), Color(int(self.grid[y, x, 1])))
            census[desc] = census.get(desc, 0) + 1
        if self.agent.carrying is not None:
            census[self.agent.carrying] = census.get(self.agent.carrying, 0) + 1
        return census

    def with_fresh_budget(self) -> "GridState":
        """steps_taken を0に戻した状態（カリキュラムからのリセット用）"""
        return replace(self, steps_taken=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridState):
            return NotImplemented
        return (
            self.agent == other.agent
            and self.mission == other.mission
            and self.steps_taken == other.steps_taken
            and self.max_steps == other.max_steps
            and self.level_id == other.level_id
            and self.seed == other.seed
            and self.history == other.history
            and np.array_equal(self.grid, other.grid)
        )

    def __hash__(self) -> int:
        return hash((self.level_id, self.seed, self.history, self.steps_taken))
