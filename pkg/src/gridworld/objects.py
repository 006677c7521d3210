"""
オブジェクト語彙

セル・色・ドア状態・向き・行動の列挙型とコード表。
グリッドは (H, W, 3) の整数配列で保持し、各セルは
(オブジェクトID, 色ID, ドア状態ID) の3つ組で表す。
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Optional, Tuple

from ..errors import UsageError


class ObjectType(IntEnum):
    EMPTY = 0
    WALL = 1
    BALL = 2
    BOX = 3
    KEY = 4
    DOOR = 5


class Color(IntEnum):
    RED = 0
    GREEN = 1
    BLUE = 2
    GREY = 3
    PURPLE = 4
    YELLOW = 5
    NONE = 6  # 空セル・壁


class DoorState(IntEnum):
    OPEN = 0
    CLOSED = 1
    LOCKED = 2
    NONE = 3  # ドア以外


class Direction(IntEnum):
    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3

    @property
    def vector(self) -> Tuple[int, int]:
        """(dx, dy)。y軸は下向き"""
        return DIR_VECTORS[self]

    def left(self) -> "Direction":
        return Direction((self - 1) % 4)

    def right(self) -> "Direction":
        return Direction((self + 1) % 4)


DIR_VECTORS: Dict[int, Tuple[int, int]] = {
    Direction.NORTH: (0, -1),
    Direction.EAST: (1, 0),
    Direction.SOUTH: (0, 1),
    Direction.WEST: (-1, 0),
}


class Action(IntEnum):
    """行動（デモファイルはこの番号に依存するため並びを変えないこと）"""
    TURN_LEFT = 0
    TURN_RIGHT = 1
    FORWARD = 2
    PICKUP = 3
    DROP = 4
    TOGGLE = 5
    DONE = 6


N_ACTIONS = len(Action)

# 持ち運べるオブジェクト
PORTABLE = frozenset({ObjectType.BALL, ObjectType.BOX, ObjectType.KEY})

N_OBJECT_CODES = len(ObjectType)
N_COLOR_CODES = len(Color)
N_DOOR_CODES = len(DoorState)

# (オブジェクト, 色) の組。ミッションのターゲットや所持品に使う
ObjectDesc = Tuple[ObjectType, Color]


@dataclass(frozen=True)
class Cell:
    """グリッドの1セル"""
    object: ObjectType
    color: Color = Color.NONE
    door_state: DoorState = DoorState.NONE

    def __post_init__(self):
        has_color = self.object not in (ObjectType.EMPTY, ObjectType.WALL)
        if has_color != (self.color != Color.NONE):
            raise UsageError(f"色の有無が不正: {self.object.name} / {self.color.name}")
        is_door = self.object == ObjectType.DOOR
        if is_door != (self.door_state != DoorState.NONE):
            raise UsageError(f"ドア状態の有無が不正: {self.object.name} / {self.door_state.name}")

    @classmethod
    def from_codes(cls, codes) -> "Cell":
        return cls(ObjectType(int(codes[0])), Color(int(codes[1])), DoorState(int(codes[2])))

    def codes(self) -> Tuple[int, int, int]:
        return (int(self.object), int(self.color), int(self.door_state))


EMPTY_CODES = (int(ObjectType.EMPTY), int(Color.NONE), int(DoorState.NONE))
WALL_CODES = (int(ObjectType.WALL), int(Color.NONE), int(DoorState.NONE))


def parse_desc(obj: str, color: Optional[str]) -> ObjectDesc:
    """("ball", "red") のような文字列の組を ObjectDesc に変換"""
    try:
        obj_type = ObjectType[obj.upper()]
        obj_color = Color[color.upper()] if color is not None else Color.NONE
    except KeyError as e:
        raise UsageError(f"未知のオブジェクト記述: {obj} {color}") from e
    return (obj_type, obj_color)


def desc_name(desc: ObjectDesc) -> str:
    """ObjectDesc を "red ball" 形式の文字列に変換"""
    obj_type, color = desc
    return f"{color.name.lower()} {obj_type.name.lower()}"
