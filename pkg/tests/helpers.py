"""
テスト用ヘルパー

文字列の地図から GridState を組み立てる。
"""

from typing import Optional, Sequence

import numpy as np

from src.gridworld import Color, Direction, DoorState, GridState, Mission, ObjectType
from src.gridworld.state import AgentPose

# 地図の凡例
LEGEND = {
    "#": (ObjectType.WALL, Color.NONE, DoorState.NONE),
    ".": (ObjectType.EMPTY, Color.NONE, DoorState.NONE),
    "R": (ObjectType.BALL, Color.RED, DoorState.NONE),
    "g": (ObjectType.BALL, Color.GREEN, DoorState.NONE),
    "b": (ObjectType.BOX, Color.BLUE, DoorState.NONE),
    "k": (ObjectType.KEY, Color.YELLOW, DoorState.NONE),
    "L": (ObjectType.DOOR, Color.YELLOW, DoorState.LOCKED),
    "C": (ObjectType.DOOR, Color.YELLOW, DoorState.CLOSED),
    "O": (ObjectType.DOOR, Color.YELLOW, DoorState.OPEN),
}
AGENT = {"^": Direction.NORTH, ">": Direction.EAST, "v": Direction.SOUTH, "<": Direction.WEST}

RED_BALL = (ObjectType.BALL, Color.RED)
GREEN_BALL = (ObjectType.BALL, Color.GREEN)
BLUE_BOX = (ObjectType.BOX, Color.BLUE)
YELLOW_KEY = (ObjectType.KEY, Color.YELLOW)
YELLOW_DOOR = (ObjectType.DOOR, Color.YELLOW)


def make_state(
    rows: Sequence[str],
    mission: Mission,
    carrying=None,
    max_steps: int = 100,
    level_id: str = "goto_local",
    seed: int = 0,
) -> GridState:
    """
    文字列の地図から状態を作る

    エージェントは ^ > v < のいずれか（その下は空き床）。
    """
    grid = np.empty((len(rows), len(rows[0]), 3), dtype=np.int8)
    agent_pos = None
    direction = Direction.NORTH
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch in AGENT:
                agent_pos = (x, y)
                direction = AGENT[ch]
                ch = "."
            grid[y, x] = LEGEND[ch]
    assert agent_pos is not None, "地図にエージェントがありません"
    return GridState(
        grid=grid,
        agent=AgentPose(position=agent_pos, direction=direction, carrying=carrying),
        mission=mission,
        steps_taken=0,
        max_steps=max_steps,
        level_id=level_id,
        seed=seed,
    )


def open_room(width: int = 6, height: int = 6, items: Optional[dict] = None) -> list:
    """
    壁で囲まれた部屋の地図

    Args:
        items: {(x, y): 文字} で書き込むオブジェクト・エージェント
    """
    rows = ["#" * width]
    for _ in range(height - 2):
        rows.append("#" + "." * (width - 2) + "#")
    rows.append("#" * width)
    for (x, y), ch in (items or {}).items():
        rows[y] = rows[y][:x] + ch + rows[y][x + 1:]
    return rows


def direct_gae(rewards, values, dones, bootstrap, gamma, lam) -> np.ndarray:
    """Σ_k (γλ)^k δ_{t+k} を直接計算（エピソード境界で打ち切る）"""
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    n = len(rewards)
    next_values = np.append(values[1:], bootstrap)
    deltas = rewards + gamma * next_values * (1.0 - dones) - values
    adv = np.zeros(n)
    for t in range(n):
        total, weight = 0.0, 1.0
        for k in range(t, n):
            total += weight * deltas[k]
            if dones[k]:
                break
            weight *= gamma * lam
        adv[t] = total
    return adv
