"""
ヒューリスティック・エキスパート

任意のレベルインスタンスを解くボット。サブゴールに分解し、
各サブゴールを (位置, 向き) 上の幅優先探索でつなぐ。
生成したデモはカリキュラム構築の入力になる。
"""

import json
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import CorruptFileError, PlanningError, ReplayError, UnsolvableInstanceError, UsageError
from .gridworld import (
    Action,
    Color,
    Direction,
    DoorState,
    GridState,
    LevelSpec,
    Mission,
    ObjectType,
    Task,
    cached_level,
    replay,
    reset,
    success_predicate,
    transition,
)
from .gridworld.objects import DIR_VECTORS, ObjectDesc, PORTABLE
from .gridworld.rules import connected_component, free_floor_cells, is_walkable, passable_cells
from .gridworld.state import Position

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

# 同じ長さの計画では左回転を優先する（探索での展開順）
_EXPANSION_ORDER = (Action.TURN_LEFT, Action.TURN_RIGHT, Action.FORWARD)


@dataclass(frozen=True)
class Demo:
    """エキスパートのデモ: (レベル, シード, ミッション, 行動列) で再生できる"""
    level_id: str
    seed: int
    mission: Mission
    actions: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.actions)

    def to_json(self) -> str:
        return json.dumps({
            "level": self.level_id,
            "seed": int(self.seed),
            "mission": self.mission.to_dict(),
            "actions": [int(a) for a in self.actions],
        }, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Demo":
        actions = tuple(int(a) for a in data["actions"])
        if any(a < 0 or a >= len(Action) for a in actions):
            raise UsageError(f"行動番号が範囲外: {actions}")
        return cls(
            level_id=str(data["level"]),
            seed=int(data["seed"]),
            mission=Mission.from_dict(data["mission"]),
            actions=actions,
        )


@dataclass(frozen=True)
class DemoSet:
    """同一レベルのデモ集合"""
    level_id: str
    demos: Tuple[Demo, ...]
    generation_seed: Optional[int] = None

    def __post_init__(self):
        if any(d.level_id != self.level_id for d in self.demos):
            raise UsageError("DemoSet のデモはすべて同じレベルである必要があります")
        seeds = [d.seed for d in self.demos]
        if len(set(seeds)) != len(seeds):
            raise UsageError("DemoSet のシードが重複しています")

    def __len__(self) -> int:
        return len(self.demos)

    def head(self, n: int) -> "DemoSet":
        """先頭 n 件だけの DemoSet（デモ数の比較実験用）"""
        return DemoSet(self.level_id, self.demos[:n], self.generation_seed)


# ============================================================================
# 経路探索
# ============================================================================

def _search(
    state: GridState,
    goal_cells: Iterable[Position],
    face_goal: bool,
    through_closed_doors: bool = False,
) -> Tuple[List[Action], Position, Direction]:
    """(位置, 向き) グラフ上の幅優先探索。計画と終了時の姿勢を返す"""
    goals: FrozenSet[Position] = frozenset(goal_cells)
    start = (state.agent.position, state.agent.direction)

    def reached(pos: Position, direction: Direction) -> bool:
        if face_goal:
            dx, dy = DIR_VECTORS[direction]
            return (pos[0] + dx, pos[1] + dy) in goals
        return pos in goals

    if reached(*start):
        return [], start[0], start[1]

    parents: Dict[Tuple[Position, Direction], Tuple[Tuple[Position, Direction], Action]] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        pos, direction = node
        for action in _EXPANSION_ORDER:
            if action == Action.TURN_LEFT:
                nxt = (pos, direction.left())
            elif action == Action.TURN_RIGHT:
                nxt = (pos, direction.right())
            else:
                dx, dy = DIR_VECTORS[direction]
                ahead = (pos[0] + dx, pos[1] + dy)
                if not is_walkable(state, ahead, through_closed_doors):
                    continue
                nxt = (ahead, direction)
            if nxt in seen:
                continue
            seen.add(nxt)
            parents[nxt] = (node, action)
            if reached(*nxt):
                plan = []
                cur = nxt
                while cur != start:
                    cur, act = parents[cur]
                    plan.append(act)
                plan.reverse()
                return plan, nxt[0], nxt[1]
            queue.append(nxt)
    raise PlanningError(f"ゴール {sorted(goals)} に到達できません")


def shortest_path(
    state: GridState,
    goal_cells: Iterable[Position],
    face_goal: bool,
    through_closed_doors: bool = False,
) -> List[Action]:
    """
    最短の行動列（回転も1手と数える）

    Args:
        state: 現在の状態
        goal_cells: ゴールセルの集合
        face_goal: True のときゴールセルに隣接して向き合った時点で終了
        through_closed_doors: 閉じたドア（施錠なし）を通行可能とみなす
                              （実行時にトグルを挟む）

    Returns:
        行動列
    """
    plan, _, _ = _search(state, goal_cells, face_goal, through_closed_doors)
    return plan


# ============================================================================
# エキスパート
# ============================================================================

class _Solved(Exception):
    """ミッション達成で計画を打ち切る"""


class ExpertBot:
    """
    サブゴール分解によるヒューリスティック・エキスパート

    使用例:
        bot = ExpertBot()
        demo = bot.solve(reset(level, seed))
    """

    def solve(self, state: GridState) -> Demo:
        """
        状態からミッション達成までの行動列を求める

        Args:
            state: 開始状態（通常はリセット直後）

        Returns:
            Demo（actions は state からの行動列）
        """
        if success_predicate(state):
            raise UsageError("ミッション達成済みの状態は解けません")
        self._state = state
        self._actions: List[int] = []
        try:
            self._solve_mission()
        except _Solved:
            pass
        except PlanningError as e:
            raise UnsolvableInstanceError(
                f"レベル {state.level_id} seed={state.seed}: {e}"
            ) from e
        if not success_predicate(self._state):
            raise UnsolvableInstanceError(
                f"レベル {state.level_id} seed={state.seed}: 計画を実行してもミッションが達成されません"
            )
        return Demo(
            level_id=state.level_id,
            seed=state.seed,
            mission=state.mission,
            actions=tuple(self._actions),
        )

    # ------------------------------------------------------------------
    # ミッション別のサブゴール
    # ------------------------------------------------------------------

    def _solve_mission(self) -> None:
        mission = self._state.mission
        task = mission.task

        if task == Task.GOTO:
            self._go_face(self._state.find(mission.target))

        elif task == Task.PICKUP:
            self._fetch(mission.target)

        elif task == Task.OPEN:
            doors = self._state.find(mission.target)
            locked = [p for p in doors if self._door_state(p) == DoorState.LOCKED]
            if locked and len(locked) == len(doors):
                self._fetch((ObjectType.KEY, mission.target[1]))
            self._go_face(doors)
            self._act(Action.TOGGLE)

        elif task == Task.PUTNEXT:
            if self._state.agent.carrying != mission.target:
                self._fetch(mission.target)
            self._go_face([self._choose_drop_cell(mission.second_target)])
            self._act(Action.DROP)

        elif task == Task.UNLOCK_PICKUP:
            door = self._locked_door()
            if door is not None:
                self._clear_blocker(door)
                door_color = self._state.grid[door[1], door[0], 1]
                key = (ObjectType.KEY, Color(int(door_color)))
                if self._state.agent.carrying != key:
                    self._fetch(key)
                self._go_face([door])
                self._act(Action.TOGGLE)
                self._drop_nearby(avoid=self._access_cells(door))
            self._fetch(mission.target)

    def _fetch(self, desc: ObjectDesc) -> None:
        """オブジェクトの前まで行って拾う（手がふさがっていれば先に置く）"""
        if self._state.agent.carrying == desc:
            return
        if self._state.agent.carrying is not None:
            self._drop_nearby(avoid=())
        self._go_face(self._state.find(desc))
        self._act(Action.PICKUP)

    def _clear_blocker(self, door: Position) -> None:
        """ドアの前をふさいでいるオブジェクトをどける"""
        reach = connected_component(
            passable_cells(self._state, locked_passable=False),
            self._state.agent.position,
        )
        for cell in self._access_cells(door):
            if self._state.object_at(cell) in PORTABLE and any(
                (cell[0] + dx, cell[1] + dy) in reach for dx, dy in DIR_VECTORS.values()
            ):
                if self._state.agent.carrying is not None:
                    self._drop_nearby(avoid=self._access_cells(door))
                self._go_face([cell])
                self._act(Action.PICKUP)
                self._drop_nearby(avoid=self._access_cells(door))

    def _choose_drop_cell(self, second: ObjectDesc) -> Position:
        """第2ターゲットの4近傍の空き床のうち最も近いもの（同距離なら (行, 列) 順）"""
        free = free_floor_cells(self._state)
        candidates = sorted(
            {
                (x + dx, y + dy)
                for x, y in self._state.find(second)
                for dx, dy in DIR_VECTORS.values()
                if (x + dx, y + dy) in free
            },
            key=lambda p: (p[1], p[0]),
        )
        best: Optional[Tuple[int, Tuple[int, int], Position]] = None
        for cell in candidates:
            try:
                plan = shortest_path(self._state, [cell], face_goal=True, through_closed_doors=True)
            except PlanningError:
                continue
            key = (len(plan), (cell[1], cell[0]), cell)
            if best is None or key[:2] < best[:2]:
                best = key
        if best is None:
            raise PlanningError(f"{second} の隣に置ける場所がありません")
        return best[2]

    def _drop_nearby(self, avoid: Iterable[Position]) -> None:
        """持っているものを近くの空き床に置く（通路を分断しない場所）"""
        avoid_set = set(avoid)
        candidates = free_floor_cells(self._state, exclude=avoid_set)
        while candidates:
            plan, pos, direction = _search(self._state, candidates, face_goal=True, through_closed_doors=True)
            dx, dy = DIR_VECTORS[direction]
            cell = (pos[0] + dx, pos[1] + dy)
            if self._keeps_connected(cell):
                self._run(plan)
                self._act(Action.DROP)
                return
            candidates.discard(cell)
        raise PlanningError("所持品を置ける場所がありません")

    def _keeps_connected(self, cell: Position) -> bool:
        """cell を塞いでも通行可能セルが連結のままか"""
        cells = passable_cells(self._state, locked_passable=True) - {cell}
        component = connected_component(cells, self._state.agent.position)
        return len(component) == len(cells)

    def _locked_door(self) -> Optional[Position]:
        grid = self._state.grid
        ys, xs = np.nonzero((grid[..., 0] == ObjectType.DOOR) & (grid[..., 2] == DoorState.LOCKED))
        if len(xs) == 0:
            return None
        return (int(xs[0]), int(ys[0]))

    def _door_state(self, pos: Position) -> int:
        return int(self._state.grid[pos[1], pos[0], 2])

    def _access_cells(self, door: Position) -> Set[Position]:
        """ドアの4近傍のうち壁でないセル"""
        cells = set()
        for dx, dy in DIR_VECTORS.values():
            cell = (door[0] + dx, door[1] + dy)
            if self._state.in_bounds(cell) and self._state.object_at(cell) != ObjectType.WALL:
                cells.add(cell)
        return cells

    # ------------------------------------------------------------------
    # 実行
    # ------------------------------------------------------------------

    def _go_face(self, cells: Sequence[Position]) -> None:
        if not cells:
            raise PlanningError("ターゲットが見つかりません")
        plan = shortest_path(self._state, cells, face_goal=True, through_closed_doors=True)
        self._run(plan)

    def _run(self, plan: Sequence[Action]) -> None:
        for action in plan:
            if action == Action.FORWARD:
                fx, fy = self._state.front_pos
                if (
                    int(self._state.grid[fy, fx, 0]) == ObjectType.DOOR
                    and int(self._state.grid[fy, fx, 2]) == DoorState.CLOSED
                ):
                    self._act(Action.TOGGLE)
            self._act(action)

    def _act(self, action: Action) -> None:
        if self._state.steps_taken >= self._state.max_steps:
            raise PlanningError("ステップ上限内に解けません")
        self._state = transition(self._state, action)
        self._actions.append(int(action))
        if success_predicate(self._state):
            raise _Solved()


def solve(state: GridState) -> Demo:
    """ExpertBot().solve の簡易呼び出し"""
    return ExpertBot().solve(state)


def derive_seeds(generation_seed: int, n: int) -> List[int]:
    """生成シードから互いに異なる n 個のシードを決定的に導出"""
    rng = np.random.default_rng(int(generation_seed) & SEED_MASK)
    seeds: List[int] = []
    seen = set()
    while len(seeds) < n:
        for s in rng.integers(0, 2 ** 63 - 1, size=n - len(seeds), dtype=np.int64):
            s = int(s)
            if s not in seen:
                seen.add(s)
                seeds.append(s)
    return seeds


def gen_demos(level: LevelSpec, n: int, generation_seed: int) -> DemoSet:
    """
    デモを n 件生成

    Args:
        level: レベル定義
        n: 件数（1以上）
        generation_seed: デモごとのシードを導出する元のシード

    Returns:
        DemoSet
    """
    if n < 1:
        raise UsageError(f"デモ数は1以上: {n}")
    bot = ExpertBot()
    demos = []
    for seed in derive_seeds(generation_seed, n):
        demos.append(bot.solve(reset(level, seed)))
    logger.info("レベル %s: デモ %d 件を生成", level.level_id, n)
    return DemoSet(level.level_id, tuple(demos), generation_seed)


def validate_demo(demo: Demo, index: Optional[int] = None) -> GridState:
    """デモを再生して成功を確認し、最終状態を返す"""
    level = cached_level(demo.level_id)
    if not demo.actions:
        raise ReplayError("行動列が空です", index)
    if len(demo.actions) > level.max_steps:
        raise ReplayError(f"行動列が max_steps ({level.max_steps}) を超えています", index)
    final = replay(level, demo.seed, demo.actions, demo_index=index)
    if not success_predicate(final):
        raise ReplayError("再生してもミッションが達成されません", index)
    return final


# ============================================================================
# ファイル入出力（JSON-lines）
# ============================================================================

def write_demos(path: Union[str, Path], demos: DemoSet) -> None:
    """1行1デモの JSON-lines で保存"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for demo in demos.demos:
            f.write(demo.to_json() + "\n")


def read_demos(path: Union[str, Path]) -> DemoSet:
    """
    JSON-lines のデモファイルを読み込む

    壊れた行があれば行番号つきの CorruptFileError を送出する。
    """
    path = Path(path)
    demos = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                demos.append(Demo.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as e:
                raise CorruptFileError(f"デモ行を解釈できません ({e})", str(path), lineno) from e
    if not demos:
        raise CorruptFileError("デモが1件もありません", str(path))
    try:
        return DemoSet(demos[0].level_id, tuple(demos))
    except UsageError as e:
        raise CorruptFileError(str(e), str(path)) from e


class ExpertAgent:
    """
    エキスパートを方策として使うラッパー（評価の基準用）

    エピソード開始時に計画を立て、act のたびに1手ずつ返す。
    """

    def __init__(self):
        self._bot = ExpertBot()
        self._plan: List[int] = []

    def begin(self, state: GridState) -> None:
        self._plan = list(self._bot.solve(state).actions)

    def act(self, state: GridState) -> int:
        if not self._plan:
            return int(Action.DONE)
        return self._plan.pop(0)
