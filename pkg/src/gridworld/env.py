"""
グリッドワールド環境

リセット・遷移・報酬・再生・観測。状態は値として扱い、
step は新しい GridState を返す（入力の状態は変更しない）。
"""

from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..errors import ReplayError, UsageError
from .levels import LevelSpec, cached_level, generate
from .objects import (
    DIR_VECTORS,
    Action,
    Color,
    Direction,
    DoorState,
    ObjectType,
    PORTABLE,
)
from .rules import is_terminal, success_predicate
from .state import GridState

VIEW_SIZE = 7

# 成功時の報酬: 1 - REWARD_DECAY * (t / max_steps)
REWARD_DECAY = 0.9


@dataclass(frozen=True, eq=False)
class Observation:
    """
    エージェント視点の部分観測

    view: (7, 7, 3) の整数配列。エージェントは最下段中央で上向き。
          グリッド外は壁として符号化し、エージェント自身のセルには所持品を入れる。
    mission_code: ミッションの整数ベクトル
    """
    view: np.ndarray
    mission_code: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Observation):
            return NotImplemented
        return np.array_equal(self.view, other.view) and np.array_equal(self.mission_code, other.mission_code)

    __hash__ = None


def _view_offsets() -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    """向きごとの視野セル → ワールド座標オフセット"""
    offsets = {}
    rows, cols = np.meshgrid(np.arange(VIEW_SIZE), np.arange(VIEW_SIZE), indexing="ij")
    ahead = (VIEW_SIZE - 1) - rows
    lateral = cols - VIEW_SIZE // 2
    for direction in Direction:
        fx, fy = DIR_VECTORS[direction]
        rx, ry = -fy, fx  # 右手方向
        offsets[int(direction)] = (ahead * fx + lateral * rx, ahead * fy + lateral * ry)
    return offsets


_VIEW_OFFSETS = _view_offsets()
_PAD = VIEW_SIZE - 1


def reset(level: LevelSpec, seed: int) -> GridState:
    """
    レベルの初期状態を生成

    Args:
        level: レベル定義
        seed: 64ビット整数のシード

    Returns:
        初期状態（同じ (level, seed) からは常に同一）
    """
    return generate(level, seed)


def transition(state: GridState, action: int) -> GridState:
    """
    ダイナミクスのみを適用（終端チェック・報酬なし）

    ステップカウンタを1進め、行動履歴に追加した新しい状態を返す。
    """
    action = Action(int(action))
    agent = state.agent
    grid = state.grid
    fx, fy = state.front_pos
    in_bounds = state.in_bounds((fx, fy))
    front = grid[fy, fx] if in_bounds else None
    new_grid = grid
    new_agent = agent

    if action == Action.TURN_LEFT:
        new_agent = replace(agent, direction=agent.direction.left())
    elif action == Action.TURN_RIGHT:
        new_agent = replace(agent, direction=agent.direction.right())
    elif action == Action.FORWARD:
        if front is not None:
            obj = int(front[0])
            if obj == ObjectType.EMPTY or (obj == ObjectType.DOOR and int(front[2]) == DoorState.OPEN):
                new_agent = replace(agent, position=(fx, fy))
    elif action == Action.PICKUP:
        if front is not None and agent.carrying is None and int(front[0]) in PORTABLE:
            carried = (ObjectType(int(front[0])), Color(int(front[1])))
            new_grid = grid.copy()
            new_grid[fy, fx] = (ObjectType.EMPTY, Color.NONE, DoorState.NONE)
            new_agent = replace(agent, carrying=carried)
    elif action == Action.DROP:
        if front is not None and agent.carrying is not None and int(front[0]) == ObjectType.EMPTY:
            obj_type, color = agent.carrying
            new_grid = grid.copy()
            new_grid[fy, fx] = (obj_type, color, DoorState.NONE)
            new_agent = replace(agent, carrying=None)
    elif action == Action.TOGGLE:
        if front is not None and int(front[0]) == ObjectType.DOOR:
            door_state = int(front[2])
            new_state = None
            if door_state == DoorState.OPEN:
                new_state = DoorState.CLOSED
            elif door_state == DoorState.CLOSED:
                new_state = DoorState.OPEN
            elif agent.carrying == (ObjectType.KEY, Color(int(front[1]))):
                new_state = DoorState.OPEN
            if new_state is not None:
                new_grid = grid.copy()
                new_grid[fy, fx, 2] = new_state
    # Action.DONE は何もしない

    return replace(
        state,
        grid=new_grid,
        agent=new_agent,
        steps_taken=state.steps_taken + 1,
        history=state.history + (int(action),),
    )


def compute_reward(state: GridState) -> float:
    """成功時の報酬（速く解くほど大きい）"""
    return 1.0 - REWARD_DECAY * (state.steps_taken / state.max_steps)


def step(state: GridState, action: int) -> Tuple[GridState, float, bool]:
    """
    1ステップ進める

    Args:
        state: 終端でない状態
        action: 行動（0..6）

    Returns:
        (次の状態, 報酬, 終了フラグ)
    """
    if is_terminal(state):
        raise UsageError("終端状態からは step できません")
    next_state = transition(state, action)
    if success_predicate(next_state):
        return next_state, compute_reward(next_state), True
    if next_state.steps_taken >= next_state.max_steps:
        return next_state, 0.0, True
    return next_state, 0.0, False


def replay(
    level: LevelSpec,
    seed: int,
    actions: Sequence[int],
    strict: bool = True,
    demo_index: Optional[int] = None,
) -> GridState:
    """
    リセットから行動列を順に適用した状態を返す

    Args:
        level: レベル定義
        seed: シード
        actions: 行動列
        strict: True のとき、行動列が尽きる前に終端に達したら ReplayError。
                False のときは終端判定なしでダイナミクスだけを適用する
                （ゴール状態から続けたランダムウォークの再構築用）
        demo_index: エラーメッセージに含めるデモ番号

    Returns:
        最終状態
    """
    state = reset(level, seed)
    for i, action in enumerate(actions):
        if strict:
            if is_terminal(state):
                raise ReplayError(f"{i} 手目の時点で終端状態に到達しています", demo_index)
            state, _, _ = step(state, action)
        else:
            state = transition(state, action)
    return state


def replay_by_id(level_id: str, seed: int, actions: Sequence[int], strict: bool = True) -> GridState:
    """レベル識別子から replay する"""
    return replay(cached_level(level_id), seed, actions, strict=strict)


def observe(state: GridState) -> Observation:
    """
    状態から部分観測を作る（副作用なし）

    Args:
        state: 状態

    Returns:
        Observation
    """
    padded = np.pad(
        state.grid,
        ((_PAD, _PAD), (_PAD, _PAD), (0, 0)),
        mode="constant",
    )
    # パディング部分は壁
    padded[:_PAD, :, :] = (ObjectType.WALL, Color.NONE, DoorState.NONE)
    padded[-_PAD:, :, :] = (ObjectType.WALL, Color.NONE, DoorState.NONE)
    padded[:, :_PAD, :] = (ObjectType.WALL, Color.NONE, DoorState.NONE)
    padded[:, -_PAD:, :] = (ObjectType.WALL, Color.NONE, DoorState.NONE)

    x, y = state.agent.position
    off_x, off_y = _VIEW_OFFSETS[int(state.agent.direction)]
    view = padded[off_y + y + _PAD, off_x + x + _PAD].copy()

    carrying = state.agent.carrying
    if carrying is not None:
        view[VIEW_SIZE - 1, VIEW_SIZE // 2] = (carrying[0], carrying[1], DoorState.NONE)
    else:
        view[VIEW_SIZE - 1, VIEW_SIZE // 2] = (ObjectType.EMPTY, Color.NONE, DoorState.NONE)
    return Observation(view=view, mission_code=state.mission.encode())


class GridWorldEnv:
    """
    ロールアウト用の状態付きラッパー

    現在の状態を1つ保持し、reset_to / step で差し替える。
    1インスタンスは1スレッドから使う。
    """

    def __init__(self, level: LevelSpec):
        """
        初期化

        Args:
            level: レベル定義
        """
        self.level = level
        self.state: Optional[GridState] = None

    def reset(self, seed: int) -> Observation:
        self.state = reset(self.level, seed)
        return observe(self.state)

    def reset_to(self, state: GridState) -> Observation:
        """任意の状態（カリキュラムの開始状態など）から始める"""
        self.state = state
        return observe(state)

    def step(self, action: int) -> Tuple[Observation, float, bool]:
        if self.state is None:
            raise UsageError("reset の前に step できません")
        self.state, reward, done = step(self.state, action)
        return observe(self.state), reward, done

    @property
    def success(self) -> bool:
        return self.state is not None and success_predicate(self.state)

