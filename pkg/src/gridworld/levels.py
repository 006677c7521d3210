"""
レベル生成

LevelSpec（レベル定義）と、シードから初期状態を決定的に生成するジェネレーター
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..constants.levels import (
    GENERATOR_MAX_RETRIES,
    LEVEL_REGISTRY,
    MAX_STEPS_FACTOR,
    MISSION_FAMILIES,
    MISSION_GOTO,
    MISSION_OPEN,
    MISSION_PICKUP,
    MISSION_PUTNEXT,
    MISSION_UNLOCK_PICKUP,
)
from ..errors import ConstructionError, UsageError
from .objects import (
    DIR_VECTORS,
    Color,
    Direction,
    DoorState,
    ObjectDesc,
    ObjectType,
    parse_desc,
)
from .rules import connected_component, passable_cells, success_predicate
from .state import AgentPose, GridState, Mission, Position, Task

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

# 妨害オブジェクト・ターゲットに使う種類
OBJECT_KINDS = (ObjectType.BALL, ObjectType.BOX, ObjectType.KEY)
OBJECT_COLORS = tuple(c for c in Color if c != Color.NONE)


@dataclass(frozen=True)
class LevelSpec:
    """レベル定義"""
    level_id: str
    name: str
    category: str
    room_size: int
    rooms: Tuple[int, int]
    distractor_count: int
    mission: str
    target: Optional[ObjectDesc] = None
    distractor_colors: Optional[Tuple[Color, ...]] = None
    doors_open: bool = False
    locked_door: bool = False
    blocked: bool = False

    def __post_init__(self):
        if self.room_size < 4:
            raise UsageError(f"room_size は4以上: {self.room_size}")
        rows, cols = self.rooms
        if rows < 1 or cols < 1:
            raise UsageError(f"部屋配置が不正: {self.rooms}")
        if self.category == "small" and self.rooms not in ((1, 1), (1, 2)):
            raise UsageError(f"small レベルの部屋配置は 1×1 か 1×2: {self.rooms}")
        if self.category == "large" and (rows < 2 or cols < 2):
            raise UsageError(f"large レベルの部屋配置は 2×2 以上: {self.rooms}")
        if self.mission not in MISSION_FAMILIES:
            raise UsageError(f"未知のミッション系列: {self.mission}")
        if self.locked_door and self.rooms != (1, 2):
            raise UsageError("施錠ドアは 1×2 の部屋配置のみ対応")
        if self.distractor_count < 0:
            raise UsageError("distractor_count は0以上")

    @property
    def max_steps(self) -> int:
        return MAX_STEPS_FACTOR * self.room_size * max(self.rooms)

    @property
    def width(self) -> int:
        return (self.room_size - 1) * self.rooms[1] + 1

    @property
    def height(self) -> int:
        return (self.room_size - 1) * self.rooms[0] + 1


def get_level(level_id: str) -> LevelSpec:
    """
    レジストリからレベル定義を取得

    Args:
        level_id: レベル識別子（例: "goto_local"）

    Returns:
        LevelSpec
    """
    if level_id not in LEVEL_REGISTRY:
        raise UsageError(f"未対応のレベル: {level_id}。対応レベル: {list(LEVEL_REGISTRY.keys())}")
    conf = LEVEL_REGISTRY[level_id]
    target = conf.get("target")
    colors = conf.get("distractor_colors")
    return LevelSpec(
        level_id=level_id,
        name=conf["name"],
        category=conf["category"],
        room_size=conf["room_size"],
        rooms=tuple(conf["rooms"]),
        distractor_count=conf["distractors"],
        mission=conf["mission"],
        target=parse_desc(*target) if target else None,
        distractor_colors=tuple(Color[c.upper()] for c in colors) if colors else None,
        doors_open=conf.get("doors_open", False),
        locked_door=conf.get("locked_door", False),
        blocked=conf.get("blocked", False),
    )


def list_levels() -> List[str]:
    """利用可能なレベル識別子の一覧"""
    return list(LEVEL_REGISTRY.keys())


class _Retry(Exception):
    """この試行の配置を捨てて作り直す"""


class LevelGenerator:
    """シードからレベルインスタンスを生成するクラス"""

    def __init__(self, spec: LevelSpec, max_retries: int = GENERATOR_MAX_RETRIES):
        """
        初期化

        Args:
            spec: レベル定義
            max_retries: 再生成の上限回数
        """
        self.spec = spec
        self.max_retries = max_retries

    def generate(self, seed: int) -> GridState:
        """
        初期状態を生成（同じシードからは常に同じ状態）

        初期状態でミッションが達成済みの場合や、到達不能な配置になった場合は
        派生シードで作り直す。

        Args:
            seed: 64ビット整数のシード

        Returns:
            初期状態
        """
        for attempt in range(self.max_retries):
            rng = np.random.default_rng(np.random.SeedSequence([int(seed) & SEED_MASK, attempt]))
            try:
                state = self._build(rng, seed)
            except _Retry:
                continue
            if success_predicate(state):
                continue
            if attempt > 0:
                logger.debug("レベル %s seed=%d: %d 回目の生成で確定", self.spec.level_id, seed, attempt + 1)
            return state
        raise ConstructionError(
            f"レベル {self.spec.level_id} seed={seed}: {self.max_retries} 回の再生成で有効な配置が得られません"
        )

    # ------------------------------------------------------------------
    # 構築
    # ------------------------------------------------------------------

    def _build(self, rng: np.random.Generator, seed: int) -> GridState:
        spec = self.spec
        grid = self._empty_grid()
        doors = self._place_doors(grid, rng)

        # ドアの前後のセルには物を置かない
        reserved = set()
        for (dx, dy) in doors:
            for vx, vy in DIR_VECTORS.values():
                reserved.add((dx + vx, dy + vy))

        occupied: set = set()
        room_cells = [self._room_cells(r, c) for r in range(spec.rooms[0]) for c in range(spec.rooms[1])]
        all_cells = [cell for cells in room_cells for cell in cells]

        def place(desc: ObjectDesc, candidates: List[Position]) -> Position:
            free = [p for p in candidates if p not in reserved and p not in occupied]
            if not free:
                raise _Retry()
            pos = free[int(rng.integers(len(free)))]
            grid[pos[1], pos[0]] = (desc[0], desc[1], DoorState.NONE)
            occupied.add(pos)
            return pos

        agent_room = 0 if spec.locked_door else int(rng.integers(len(room_cells)))
        blocker_pos: Optional[Position] = None
        key_desc: Optional[ObjectDesc] = None

        if spec.mission in (MISSION_GOTO, MISSION_PICKUP):
            target = spec.target or self._random_desc(rng)
            place(target, all_cells)
            mission = Mission(Task.GOTO if spec.mission == MISSION_GOTO else Task.PICKUP, target)
            excluded = [target]
        elif spec.mission == MISSION_PUTNEXT:
            first = self._random_desc(rng)
            second = self._random_desc(rng, exclude=[first])
            place(first, all_cells)
            place(second, all_cells)
            mission = Mission(Task.PUTNEXT, first, second)
            excluded = [first, second]
        elif spec.mission == MISSION_OPEN:
            if not doors:
                raise ConstructionError(f"レベル {spec.level_id}: Open にはドアが必要です")
            dx, dy = doors[int(rng.integers(len(doors)))]
            door_color = Color(int(grid[dy, dx, 1]))
            mission = Mission(Task.OPEN, (ObjectType.DOOR, door_color))
            excluded = []
        else:  # MISSION_UNLOCK_PICKUP
            (dx, dy), = doors
            door_color = Color(int(grid[dy, dx, 1]))
            key_desc = (ObjectType.KEY, door_color)
            target_kind = (ObjectType.BALL, ObjectType.BOX)[int(rng.integers(2))]
            target = (target_kind, OBJECT_COLORS[int(rng.integers(len(OBJECT_COLORS)))])
            if spec.blocked:
                # 部屋0側のドア前に障害物のボールを置く
                blocker_pos = (dx - 1, dy)
                blocker = self._random_desc(rng, exclude=[target], kinds=(ObjectType.BALL,))
                grid[dy, dx - 1] = (blocker[0], blocker[1], DoorState.NONE)
                occupied.add(blocker_pos)
            place(key_desc, room_cells[0])
            place(target, room_cells[1])
            mission = Mission(Task.UNLOCK_PICKUP, target)
            excluded = [target, key_desc]

        # 施錠ドアのあるレベルでは鍵を1本に限る
        distractor_kinds = (ObjectType.BALL, ObjectType.BOX) if key_desc is not None else OBJECT_KINDS
        for _ in range(spec.distractor_count):
            desc = self._random_desc(
                rng, exclude=excluded, colors=spec.distractor_colors, kinds=distractor_kinds
            )
            place(desc, all_cells)

        # エージェント配置
        agent_candidates = [p for p in room_cells[agent_room] if p not in occupied]
        if not agent_candidates:
            raise _Retry()
        agent_pos = agent_candidates[int(rng.integers(len(agent_candidates)))]
        direction = Direction(int(rng.integers(4)))

        state = GridState(
            grid=grid,
            agent=AgentPose(position=agent_pos, direction=direction),
            mission=mission,
            steps_taken=0,
            max_steps=spec.max_steps,
            level_id=spec.level_id,
            seed=int(seed),
        )
        self._check_reachability(state, blocker_pos, key_desc)
        return state

    def _empty_grid(self) -> np.ndarray:
        spec = self.spec
        grid = np.empty((spec.height, spec.width, 3), dtype=np.int8)
        grid[...] = (ObjectType.WALL, Color.NONE, DoorState.NONE)
        step = spec.room_size - 1
        for r in range(spec.rooms[0]):
            for c in range(spec.rooms[1]):
                x0, y0 = c * step, r * step
                grid[y0 + 1:y0 + step, x0 + 1:x0 + step] = (ObjectType.EMPTY, Color.NONE, DoorState.NONE)
        return grid

    def _room_cells(self, row: int, col: int) -> List[Position]:
        step = self.spec.room_size - 1
        x0, y0 = col * step, row * step
        return [(x, y) for y in range(y0 + 1, y0 + step) for x in range(x0 + 1, x0 + step)]

    def _place_doors(self, grid: np.ndarray, rng: np.random.Generator) -> List[Position]:
        """部屋同士を全域木でつなぐドアを配置"""
        spec = self.spec
        rows, cols = spec.rooms
        step = spec.room_size - 1
        if rows * cols == 1:
            return []

        # ランダム化した深さ優先探索で全域木を作る
        visited = {(0, 0)}
        stack = [(0, 0)]
        edges = []
        while stack:
            r, c = stack[-1]
            neighbors = [
                (r + dr, c + dc)
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
                if 0 <= r + dr < rows and 0 <= c + dc < cols and (r + dr, c + dc) not in visited
            ]
            if not neighbors:
                stack.pop()
                continue
            nxt = neighbors[int(rng.integers(len(neighbors)))]
            visited.add(nxt)
            edges.append(((r, c), nxt))
            stack.append(nxt)

        if spec.locked_door:
            state = DoorState.LOCKED
        elif spec.doors_open:
            state = DoorState.OPEN
        else:
            state = DoorState.CLOSED

        doors = []
        for (r1, c1), (r2, c2) in edges:
            offset = 1 + int(rng.integers(step - 1))
            if r1 == r2:  # 左右に隣接: 縦の壁
                x = max(c1, c2) * step
                y = r1 * step + offset
            else:  # 上下に隣接: 横の壁
                x = c1 * step + offset
                y = max(r1, r2) * step
            color = OBJECT_COLORS[int(rng.integers(len(OBJECT_COLORS)))]
            grid[y, x] = (ObjectType.DOOR, color, state)
            doors.append((x, y))
        return doors

    def _random_desc(
        self,
        rng: np.random.Generator,
        exclude: Optional[List[ObjectDesc]] = None,
        colors: Optional[Tuple[Color, ...]] = None,
        kinds: Tuple[ObjectType, ...] = OBJECT_KINDS,
    ) -> ObjectDesc:
        exclude = exclude or []
        colors = colors or OBJECT_COLORS
        candidates = [(k, c) for k in kinds for c in colors if (k, c) not in exclude]
        if not candidates:
            raise ConstructionError(f"レベル {self.spec.level_id}: 妨害オブジェクトの候補がありません")
        return candidates[int(rng.integers(len(candidates)))]

    def _check_reachability(
        self,
        state: GridState,
        blocker_pos: Optional[Position],
        key_desc: Optional[ObjectDesc],
    ) -> None:
        """
        解ける配置かを確認

        - 通行可能セル（床・ドア）がすべて連結
        - 各オブジェクトに、隣接する到達可能な床セルがある
        - 施錠ドアがある場合、鍵と障害物はドアを通らずに到達可能
        """
        treat_free = [blocker_pos] if blocker_pos else None
        cells = passable_cells(state, locked_passable=True, treat_as_free=treat_free)
        if connected_component(cells, state.agent.position) != set(cells):
            raise _Retry()

        grid = state.grid
        ys, xs = np.nonzero(np.isin(grid[..., 0], [int(k) for k in OBJECT_KINDS]))
        floor = {p for p in cells if grid[p[1], p[0], 0] == ObjectType.EMPTY}
        for y, x in zip(ys, xs):
            if (int(x), int(y)) == blocker_pos:
                continue
            if not any((x + dx, y + dy) in floor for dx, dy in DIR_VECTORS.values()):
                raise _Retry()

        if key_desc is not None:
            near = passable_cells(state, locked_passable=False)
            if blocker_pos is not None:
                near = near - {blocker_pos}
            reach = connected_component(frozenset(near), state.agent.position)
            needed = list(state.find(key_desc))
            if blocker_pos is not None:
                needed.append(blocker_pos)
            for x, y in needed:
                if not any((x + dx, y + dy) in reach for dx, dy in DIR_VECTORS.values()):
                    raise _Retry()


def generate(spec: LevelSpec, seed: int) -> GridState:
    """LevelGenerator の簡易呼び出し"""
    return LevelGenerator(spec).generate(seed)


_SPEC_CACHE: Dict[str, LevelSpec] = {}


def cached_level(level_id: str) -> LevelSpec:
    """get_level の結果をキャッシュして返す"""
    if level_id not in _SPEC_CACHE:
        _SPEC_CACHE[level_id] = get_level(level_id)
    return _SPEC_CACHE[level_id]
