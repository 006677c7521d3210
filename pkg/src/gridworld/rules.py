"""
成功判定と通行可否のルール
"""

from collections import deque
from typing import FrozenSet, Iterable, Optional, Set

import numpy as np

from .objects import DIR_VECTORS, DoorState, ObjectType
from .state import GridState, Position, Task


def success_predicate(state: GridState) -> bool:
    """
    ミッション達成判定

    - GoTo: ターゲットに隣接し、その方向を向いている
    - Pickup / UnlockPickup: ターゲットを持っている
    - Open: 指定色のドアが開いている
    - PutNext: 2つのターゲットが床上で4近傍に隣接している
    """
    mission = state.mission
    task = mission.task

    if task == Task.GOTO:
        if not state.in_bounds(state.front_pos):
            return False
        fx, fy = state.front_pos
        codes = state.grid[fy, fx]
        return int(codes[0]) == mission.target[0] and int(codes[1]) == mission.target[1]

    if task in (Task.PICKUP, Task.UNLOCK_PICKUP):
        return state.agent.carrying == mission.target

    if task == Task.OPEN:
        grid = state.grid
        return bool(np.any(
            (grid[..., 0] == ObjectType.DOOR)
            & (grid[..., 1] == mission.target[1])
            & (grid[..., 2] == DoorState.OPEN)
        ))

    if task == Task.PUTNEXT:
        firsts = state.find(mission.target)
        seconds = state.find(mission.second_target)
        return any(
            abs(ax - bx) + abs(ay - by) == 1
            for ax, ay in firsts
            for bx, by in seconds
        )

    return False


def is_terminal(state: GridState) -> bool:
    """成功済み、またはステップ上限に到達した状態"""
    return state.steps_taken >= state.max_steps or success_predicate(state)


def is_walkable(state: GridState, pos: Position, through_closed_doors: bool = False) -> bool:
    """エージェントが進入できるセルか（空き床・開いたドア）"""
    if not state.in_bounds(pos):
        return False
    x, y = pos
    obj = int(state.grid[y, x, 0])
    if obj == ObjectType.EMPTY:
        return True
    if obj == ObjectType.DOOR:
        door_state = int(state.grid[y, x, 2])
        if door_state == DoorState.OPEN:
            return True
        return through_closed_doors and door_state == DoorState.CLOSED
    return False


def free_floor_cells(state: GridState, exclude: Iterable[Position] = ()) -> Set[Position]:
    """オブジェクトを置ける空き床セル（ドア・エージェント位置を除く）"""
    excluded = set(exclude)
    excluded.add(state.agent.position)
    ys, xs = np.nonzero(state.grid[..., 0] == ObjectType.EMPTY)
    return {(int(x), int(y)) for y, x in zip(ys, xs)} - excluded


def connected_component(
    cells: FrozenSet[Position],
    start: Position,
) -> Set[Position]:
    """cells 内で start から4近傍でたどれるセル集合"""
    if start not in cells:
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in DIR_VECTORS.values():
            nxt = (x + dx, y + dy)
            if nxt in cells and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def passable_cells(
    state: GridState,
    locked_passable: bool = True,
    treat_as_free: Optional[Iterable[Position]] = None,
) -> FrozenSet[Position]:
    """
    通行可能とみなすセル集合（空き床・ドア）

    Args:
        state: 対象の状態
        locked_passable: 施錠ドアを通行可能とみなすか
        treat_as_free: オブジェクトがあっても空きとみなすセル
    """
    grid = state.grid
    mask = grid[..., 0] == ObjectType.EMPTY
    doors = grid[..., 0] == ObjectType.DOOR
    if not locked_passable:
        doors = doors & (grid[..., 2] != DoorState.LOCKED)
    mask = mask | doors
    cells = {(int(x), int(y)) for y, x in zip(*np.nonzero(mask))}
    if treat_as_free:
        cells.update(treat_as_free)
    cells.add(state.agent.position)
    return frozenset(cells)
