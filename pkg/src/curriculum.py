"""
カリキュラム

ゴールまでの距離ごとにまとめた開始状態のステージ列。
エキスパートのデモ（後ろから切り出す）またはゴール状態からの
ランダムウォークで構築する。
"""

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CorruptFileError, EmptyStageError, UsageError
from .expert import DemoSet, validate_demo
from .gridworld import GridState, LevelSpec, N_ACTIONS, cached_level, replay, success_predicate, transition

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

SOURCE_DEMOS = "demos"
SOURCE_RANDOM_WALK = "random_walk"

COMBINE_NONE = "none"
COMBINE_FIXED = "fixed"
COMBINE_EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class StartState:
    """
    カリキュラムの開始状態

    状態そのものではなく (シード, 行動列の何手目まで) を保持し、
    使うときに再生して作り直す。

    Attributes:
        level_id: レベル識別子
        seed: リセットのシード
        prefix_len: 適用済みの行動数
        source_demo: 行動列（デモまたはウォーク）の番号
        distance: ゴールまでの手数（ランダムウォークではウォーク長）
    """
    level_id: str
    seed: int
    prefix_len: int
    source_demo: int
    distance: int

    def to_dict(self) -> Dict[str, int]:
        return {
            "demo_index": self.source_demo,
            "seed": self.seed,
            "prefix_len": self.prefix_len,
            "distance": self.distance,
        }


@dataclass(frozen=True)
class CombinePlan:
    """ステージ結合の方法（none / fixed(n) / exponential）"""
    mode: str = COMBINE_NONE
    n: int = 1

    def __post_init__(self):
        if self.mode not in (COMBINE_NONE, COMBINE_FIXED, COMBINE_EXPONENTIAL):
            raise UsageError(f"未知の結合モード: {self.mode}")
        if self.mode == COMBINE_FIXED and self.n < 1:
            raise UsageError(f"fixed の n は1以上: {self.n}")

    @classmethod
    def parse(cls, text: str) -> "CombinePlan":
        """'none' / 'fixed:5' / 'exp' 形式の文字列から作る"""
        text = text.strip().lower()
        if text == COMBINE_NONE:
            return cls(COMBINE_NONE)
        if text in ("exp", COMBINE_EXPONENTIAL):
            return cls(COMBINE_EXPONENTIAL)
        if text.startswith("fixed:"):
            try:
                n = int(text.split(":", 1)[1])
            except ValueError:
                raise UsageError(f"結合モードの指定が不正です: {text}")
            return cls(COMBINE_FIXED, n)
        raise UsageError(f"結合モードの指定が不正です: {text}（none / fixed:N / exp）")

    def label(self) -> str:
        if self.mode == COMBINE_FIXED:
            return f"fixed:{self.n}"
        if self.mode == COMBINE_EXPONENTIAL:
            return "exp"
        return COMBINE_NONE

    def group_sizes(self, n_stages: int) -> List[int]:
        """n_stages 個のステージをまとめるグループの大きさ"""
        if self.mode == COMBINE_NONE or n_stages == 0:
            return [1] * n_stages
        if self.mode == COMBINE_FIXED:
            sizes = [self.n] * (n_stages // self.n)
            if n_stages % self.n:
                sizes.append(n_stages % self.n)
            return sizes
        sizes = []
        remaining, size = n_stages, 1
        while remaining > 0:
            sizes.append(min(size, remaining))
            remaining -= size
            size *= 2
        return sizes


@dataclass(frozen=True)
class Curriculum:
    """
    ステージの列（ステージ1がゴールに最も近い）

    Attributes:
        level_id: レベル識別子
        stages: 各ステージの開始状態
        action_bank: 開始状態の元になる行動列（source_demo で参照）
        bank_seeds: 各行動列のリセットシード
        source: "demos" または "random_walk"
        combine_plan: 適用済みの結合方法
        discard_rates: ランダムウォークの各ステップで捨てた割合
    """
    level_id: str
    stages: Tuple[Tuple[StartState, ...], ...]
    action_bank: Tuple[Tuple[int, ...], ...]
    bank_seeds: Tuple[int, ...]
    source: str = SOURCE_DEMOS
    combine_plan: CombinePlan = field(default_factory=CombinePlan)
    discard_rates: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.source not in (SOURCE_DEMOS, SOURCE_RANDOM_WALK):
            raise UsageError(f"未知のカリキュラム種別: {self.source}")
        if len(self.action_bank) != len(self.bank_seeds):
            raise UsageError("action_bank と bank_seeds の長さが一致しません")

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def total_states(self) -> int:
        return sum(len(s) for s in self.stages)

    def stage(self, stage_idx: int) -> Tuple[StartState, ...]:
        """1始まりのステージ番号でステージを返す"""
        if not 1 <= stage_idx <= self.n_stages:
            raise UsageError(f"ステージ番号は 1..{self.n_stages}: {stage_idx}")
        return self.stages[stage_idx - 1]

    def stage_sizes(self) -> List[int]:
        return [len(s) for s in self.stages]

    def materialize(self, start: StartState) -> GridState:
        """開始状態を再生して GridState にする"""
        actions = self.action_bank[start.source_demo][:start.prefix_len]
        strict = self.source == SOURCE_DEMOS
        return _materialize(start.level_id, start.seed, actions, strict)

    def remaining_actions(self, start: StartState) -> Tuple[int, ...]:
        """デモ由来の開始状態からゴールまでの残りの行動列"""
        if self.source != SOURCE_DEMOS:
            raise UsageError("ランダムウォーク由来の開始状態には残りの行動列がありません")
        return self.action_bank[start.source_demo][start.prefix_len:]


@lru_cache(maxsize=8192)
def _materialize(level_id: str, seed: int, actions: Tuple[int, ...], strict: bool) -> GridState:
    return replay(cached_level(level_id), seed, actions, strict=strict)


# ============================================================================
# 構築
# ============================================================================

def build_from_demos(demos: DemoSet) -> Curriculum:
    """
    デモからカリキュラムを構築

    長さ L のデモから、k = 1..L-1 について「ゴールまで k 手」の状態を
    ステージ k に加える。ステージ数は最長デモの長さ - 1。

    Args:
        demos: デモ集合（すべて再生可能であること）

    Returns:
        Curriculum
    """
    for i, demo in enumerate(demos.demos):
        validate_demo(demo, index=i)
    lengths = [len(d) for d in demos.demos]
    if not lengths or max(lengths) < 2:
        raise UsageError("長さ2以上のデモが少なくとも1件必要です")

    n_stages = max(lengths) - 1
    stages: List[List[StartState]] = [[] for _ in range(n_stages)]
    for i, demo in enumerate(demos.demos):
        length = len(demo)
        for k in range(1, length):
            stages[k - 1].append(StartState(
                level_id=demos.level_id,
                seed=demo.seed,
                prefix_len=length - k,
                source_demo=i,
                distance=k,
            ))

    logger.info(
        "レベル %s: デモ %d 件から %d ステージ（開始状態 %d 個）を構築",
        demos.level_id, len(demos), n_stages, sum(len(s) for s in stages),
    )
    return Curriculum(
        level_id=demos.level_id,
        stages=tuple(tuple(s) for s in stages),
        action_bank=tuple(d.actions for d in demos.demos),
        bank_seeds=tuple(d.seed for d in demos.demos),
        source=SOURCE_DEMOS,
    )


def goal_states_from_demos(demos: DemoSet) -> List[GridState]:
    """デモを最後まで再生したゴール状態の一覧"""
    return [validate_demo(d, index=i) for i, d in enumerate(demos.demos)]


def build_random_walk(
    level: LevelSpec,
    goal_states: Sequence[GridState],
    n_stages: int,
    walk_seed: int,
) -> Curriculum:
    """
    ゴール状態からのランダムウォークでカリキュラムを構築

    各ゴール状態から一様ランダムな行動を n_stages 回続け、i 手後の状態を
    ステージ i に入れる。途中で再びミッション達成状態に入ったウォークは
    その時点以降を捨てる。

    ステップ i の破棄率は「i 手目まで残っていたウォークのうち i 手目で
    達成状態に入った割合」。GoTo 系ではターゲットを向いている間は達成扱いで、
    1手目の前進（物にぶつかって止まる）・置く・トグル・完了はどれも向きを
    変えないため、ステージ1の破棄率はおよそ 4/7（約57%）になる。

    Args:
        level: レベル定義
        goal_states: ミッション達成直後の状態
        n_stages: ステージ数（ウォーク長）
        walk_seed: 乱数シード

    Returns:
        Curriculum（discard_rates にステップごとの破棄率）
    """
    if n_stages < 1:
        raise UsageError(f"n_stages は1以上: {n_stages}")
    if not goal_states:
        raise UsageError("ゴール状態が1つも与えられていません")
    for g in goal_states:
        if g.level_id != level.level_id:
            raise UsageError(f"ゴール状態のレベルが一致しません: {g.level_id}")
        if not success_predicate(g):
            raise UsageError(f"ゴール状態がミッション達成状態ではありません (seed={g.seed})")

    rng = np.random.default_rng(int(walk_seed) & SEED_MASK)
    stages: List[List[StartState]] = [[] for _ in range(n_stages)]
    alive = np.zeros(n_stages, dtype=np.int64)
    discarded = np.zeros(n_stages, dtype=np.int64)
    bank: List[Tuple[int, ...]] = []
    seeds: List[int] = []

    for walk_index, goal in enumerate(goal_states):
        walk = tuple(int(a) for a in rng.integers(N_ACTIONS, size=n_stages))
        bank.append(goal.history + walk)
        seeds.append(goal.seed)
        state = goal
        for i in range(n_stages):
            alive[i] += 1
            state = transition(state, walk[i])
            if success_predicate(state):
                discarded[i] += 1
                break
            stages[i].append(StartState(
                level_id=level.level_id,
                seed=goal.seed,
                prefix_len=len(goal.history) + i + 1,
                source_demo=walk_index,
                distance=i + 1,
            ))

    rates = tuple(float(d / a) if a else 0.0 for d, a in zip(discarded, alive))
    for i, (d, a) in enumerate(zip(discarded, alive), start=1):
        if d:
            logger.warning("ステージ %d: ゴールに戻ったウォーク %d/%d 本を破棄", i, d, a)
    for i, s in enumerate(stages, start=1):
        if not s:
            raise EmptyStageError(f"ステージ {i} のウォークがすべて破棄されました")

    return Curriculum(
        level_id=level.level_id,
        stages=tuple(tuple(s) for s in stages),
        action_bank=tuple(bank),
        bank_seeds=tuple(seeds),
        source=SOURCE_RANDOM_WALK,
        discard_rates=rates,
    )


def combine_stages(c: Curriculum, plan: CombinePlan) -> Curriculum:
    """
    連続するステージをまとめて短いカリキュラムにする

    順序は保ったまま各グループのステージを連結する。
    """
    if plan.mode == COMBINE_NONE:
        return c
    combined = []
    start = 0
    for size in plan.group_sizes(c.n_stages):
        group: List[StartState] = []
        for s in c.stages[start:start + size]:
            group.extend(s)
        combined.append(tuple(group))
        start += size
    return Curriculum(
        level_id=c.level_id,
        stages=tuple(combined),
        action_bank=c.action_bank,
        bank_seeds=c.bank_seeds,
        source=c.source,
        combine_plan=plan,
        discard_rates=c.discard_rates,
    )


def draw_start(c: Curriculum, stage_idx: int, rng: np.random.Generator) -> Tuple[StartState, GridState]:
    """
    ステージから開始状態を一様に1つ選び、再生した状態と合わせて返す

    返す状態のステップカウンタは0に戻す。
    """
    stage = c.stage(stage_idx)
    if not stage:
        raise EmptyStageError(f"ステージ {stage_idx} が空です")
    start = stage[int(rng.integers(len(stage)))]
    return start, c.materialize(start).with_fresh_budget()


def sample_start(c: Curriculum, stage_idx: int, rng: np.random.Generator) -> GridState:
    """ステージから開始状態を一様にサンプリング"""
    return draw_start(c, stage_idx, rng)[1]


# ============================================================================
# ファイル入出力
# ============================================================================

def curriculum_to_dict(c: Curriculum) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "level": c.level_id,
        "n_stages": c.n_stages,
        "combine_plan": c.combine_plan.label(),
        "source": c.source,
        "demos": [
            {"seed": int(seed), "actions": list(actions)}
            for seed, actions in zip(c.bank_seeds, c.action_bank)
        ],
        "stages": [[s.to_dict() for s in stage] for stage in c.stages],
    }
    if c.discard_rates is not None:
        data["discard_rates"] = list(c.discard_rates)
    return data


def curriculum_from_dict(data: Dict[str, Any]) -> Curriculum:
    level_id = str(data["level"])
    stages = tuple(
        tuple(
            StartState(
                level_id=level_id,
                seed=int(s["seed"]),
                prefix_len=int(s["prefix_len"]),
                source_demo=int(s["demo_index"]),
                distance=int(s.get("distance", i)),
            )
            for s in stage
        )
        for i, stage in enumerate(data["stages"], start=1)
    )
    if len(stages) != int(data["n_stages"]):
        raise ValueError(f"n_stages ({data['n_stages']}) とステージ数 ({len(stages)}) が一致しません")
    bank = data["demos"]
    rates = data.get("discard_rates")
    return Curriculum(
        level_id=level_id,
        stages=stages,
        action_bank=tuple(tuple(int(a) for a in d["actions"]) for d in bank),
        bank_seeds=tuple(int(d["seed"]) for d in bank),
        source=data.get("source", SOURCE_DEMOS),
        combine_plan=CombinePlan.parse(data.get("combine_plan", COMBINE_NONE)),
        discard_rates=tuple(float(r) for r in rates) if rates is not None else None,
    )


def write_curriculum(path: Union[str, Path], c: Curriculum) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(curriculum_to_dict(c), f, ensure_ascii=False)
        f.write("\n")


def read_curriculum(path: Union[str, Path]) -> Curriculum:
    """カリキュラムファイルを読み込む（壊れていれば CorruptFileError）"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        c = curriculum_from_dict(data)
    except json.JSONDecodeError as e:
        raise CorruptFileError(f"JSON を解釈できません ({e.msg})", str(path), e.lineno) from e
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptFileError(f"カリキュラムの形式が不正です ({e})", str(path)) from e
    for stage in c.stages:
        for s in stage:
            if not 0 <= s.source_demo < len(c.action_bank):
                raise CorruptFileError(f"demo_index が範囲外: {s.source_demo}", str(path))
            if s.prefix_len > len(c.action_bank[s.source_demo]):
                raise CorruptFileError(f"prefix_len が行動列より長い: {s.prefix_len}", str(path))
    return c

