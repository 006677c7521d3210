"""
評価指標

評価成功率、目標精度に達するまでのフレーム数、ランダムウォークの
ゴール到達率、デモ統計、実行結果の集計。
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .constants.defaults import ACCURACY_TARGETS
from .constants.levels import REFERENCE_DEMO_STATS, REFERENCE_RANDOM_WALK
from .curriculum import build_from_demos
from .errors import UsageError
from .expert import Demo, DemoSet, ExpertBot, derive_seeds, gen_demos
from .gridworld import GridState, LevelSpec, N_ACTIONS, cached_level, observe, replay, reset, step
from .neuralpolicy import PolicyParams, forward_batch

if TYPE_CHECKING:
    from .trainer import TrainingLog

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

# ランダムウォーク統計で、短いデモを引き直す回数の上限（試行数の倍数）
MAX_REDRAW_FACTOR = 100

# 表で「到達せず」を表す記号
NOT_REACHED = "-"


class Agent(Protocol):
    """状態を見て行動を返すエージェント"""

    def begin(self, state: GridState) -> None: ...

    def act(self, state: GridState) -> int: ...


@dataclass(frozen=True)
class EvalReport:
    """評価結果"""
    episodes: int
    success_rate: float
    mean_length: float
    frames: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.success_rate <= 1.0:
            raise UsageError(f"成功率は [0, 1] の範囲: {self.success_rate}")


def _eval_seeds(eval_seed: int, n: int) -> List[int]:
    return derive_seeds(int(eval_seed) & SEED_MASK, n)


def eval_success_rate(
    policy: Union[PolicyParams, Agent],
    level: LevelSpec,
    n_episodes: int,
    eval_seed: int,
    frames: Optional[int] = None,
) -> EvalReport:
    """
    通常のリセット分布での評価成功率（報酬 > 0 で終わったエピソードの割合）

    Args:
        policy: 方策パラメータ（貪欲に行動）またはエージェント
        level: レベル定義
        n_episodes: エピソード数
        eval_seed: 評価用シード（同じ値なら同じ初期状態の列）
        frames: レポートに記録する学習フレーム数

    Returns:
        EvalReport
    """
    if n_episodes < 1:
        raise UsageError(f"評価エピソード数は1以上: {n_episodes}")
    seeds = _eval_seeds(eval_seed, n_episodes)
    if isinstance(policy, PolicyParams):
        successes, lengths = _eval_params(policy, level, seeds)
    else:
        successes, lengths = _eval_agent(policy, level, seeds)
    return EvalReport(
        episodes=n_episodes,
        success_rate=float(np.mean(successes)),
        mean_length=float(np.mean(lengths)),
        frames=frames,
    )


def _eval_params(p: PolicyParams, level: LevelSpec, seeds: Sequence[int]) -> Tuple[List[bool], List[int]]:
    """全エピソードをまとめて進める貪欲ロールアウト"""
    states = [reset(level, s) for s in seeds]
    successes = [False] * len(seeds)
    lengths = [0] * len(seeds)
    active = list(range(len(seeds)))
    while active:
        observations = [observe(states[i]) for i in active]
        views = np.stack([o.view for o in observations])
        missions = np.stack([o.mission_code for o in observations])
        logits, _ = forward_batch(p, views, missions)
        actions = np.argmax(logits, axis=1)
        still_active = []
        for i, action in zip(active, actions):
            states[i], reward, done = step(states[i], int(action))
            lengths[i] += 1
            if done:
                successes[i] = reward > 0
            else:
                still_active.append(i)
        active = still_active
    return successes, lengths


def _eval_agent(agent: Agent, level: LevelSpec, seeds: Sequence[int]) -> Tuple[List[bool], List[int]]:
    successes, lengths = [], []
    for seed in seeds:
        state = reset(level, seed)
        agent.begin(state)
        done, reward, length = False, 0.0, 0
        while not done:
            state, reward, done = step(state, agent.act(state))
            length += 1
        successes.append(reward > 0)
        lengths.append(length)
    return successes, lengths


class RandomAgent:
    """一様ランダムに行動するエージェント"""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def begin(self, state: GridState) -> None:
        pass

    def act(self, state: GridState) -> int:
        return int(self.rng.integers(N_ACTIONS))


# ============================================================================
# フレーム数
# ============================================================================

def frames_to_accuracy(log: "TrainingLog", target: float) -> Optional[int]:
    """
    評価成功率が初めて target 以上になったときのフレーム数

    カリキュラムありの実行では、カリキュラム完了後の評価だけを数える。
    到達しなければ None。
    """
    for frames, rate, counted in log.eval_points():
        if counted and rate >= target:
            return frames
    return None


@dataclass
class RunSummary:
    """1実行の要約（目標精度 → 到達フレーム数）"""
    run_id: str
    level_id: str
    mode: str
    frames_to_accuracy: Dict[float, Optional[int]] = field(default_factory=dict)
    final_eval: Optional[float] = None
    total_frames: int = 0

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {
            "run_id": self.run_id,
            "level": self.level_id,
            "mode": self.mode,
            "total_frames": self.total_frames,
            "final_eval": self.final_eval,
        }
        for target, frames in self.frames_to_accuracy.items():
            data[f"frames_to_{target:g}"] = frames
        return data


def summarize_run(
    log: "TrainingLog",
    level_id: str,
    mode: str,
    targets: Iterable[float] = ACCURACY_TARGETS,
) -> RunSummary:
    """学習ログから RunSummary を作る"""
    points = log.eval_points()
    return RunSummary(
        run_id=log.run_id,
        level_id=level_id,
        mode=mode,
        frames_to_accuracy={t: frames_to_accuracy(log, t) for t in targets},
        final_eval=points[-1][1] if points else None,
        total_frames=log.records[-1].frames if log.records else 0,
    )


def summarize_runs(
    summaries: Sequence[RunSummary],
    targets: Iterable[float] = ACCURACY_TARGETS,
) -> pd.DataFrame:
    """
    (レベル, モード) ごとに到達フレーム数を平均する

    到達した実行だけで平均し、どの実行も到達していなければ "-"。
    スケジューラの2方式を同じモード名で渡せば2方式の平均になる。
    """
    targets = list(targets)
    rows = []
    groups: Dict[Tuple[str, str], List[RunSummary]] = {}
    for s in summaries:
        groups.setdefault((s.level_id, s.mode), []).append(s)
    for (level_id, mode), runs in groups.items():
        row: Dict[str, object] = {"level": level_id, "mode": mode, "runs": len(runs)}
        for t in targets:
            reached = [r.frames_to_accuracy.get(t) for r in runs]
            reached = [f for f in reached if f is not None]
            row[f"frames_to_{t:g}"] = float(np.mean(reached)) if reached else NOT_REACHED
            row[f"reached_{t:g}"] = len(reached)
        rows.append(row)
    return pd.DataFrame(rows)


def comparison_table(summaries: Sequence[RunSummary], target: float = 0.95) -> pd.DataFrame:
    """レベル × モードの到達フレーム数の表（未到達は "-"）"""
    long = summarize_runs(summaries, [target])
    if long.empty:
        return pd.DataFrame(columns=["level"])
    column = f"frames_to_{target:g}"
    wide = long.pivot(index="level", columns="mode", values=column).fillna(NOT_REACHED)
    wide.columns.name = None
    return wide.reset_index()


# ============================================================================
# ランダムウォーク
# ============================================================================

def walk_reaches_goal(state: GridState, n_actions: int, rng: np.random.Generator) -> bool:
    """一様ランダムな行動を最大 n_actions 回取り、報酬 > 0 で終わったか"""
    for _ in range(n_actions):
        state, reward, done = step(state, int(rng.integers(N_ACTIONS)))
        if done:
            return reward > 0
    return False


def random_walk_goal_rates(
    level: LevelSpec,
    ks: Sequence[int],
    trials: int,
    seed: int,
    walk_len: Optional[int] = None,
) -> Dict[int, float]:
    """
    ゴールの k 手前からランダムウォークしたときのゴール到達率（複数の k をまとめて計算）

    各試行はリセットしたインスタンスをエキスパートで解き、ゴールの k 手前まで
    再生してからランダムに行動する。デモが k 手より短い試行は引き直す。
    エキスパートの解は k の間で共有する。

    Args:
        level: レベル定義
        ks: ゴールまでの手数の一覧（1以上）
        trials: k ごとの試行数
        seed: 乱数シード
        walk_len: ランダムに取る行動数（None なら k）

    Returns:
        {k: 到達率}
    """
    if trials < 1:
        raise UsageError(f"試行数は1以上: {trials}")
    if any(k < 1 for k in ks):
        raise UsageError(f"k は1以上: {list(ks)}")
    if walk_len is not None and walk_len < 1:
        raise UsageError(f"walk_len は1以上: {walk_len}")
    too_far = [k for k in ks if k > level.max_steps]
    if too_far:
        raise UsageError(
            f"k はステップ上限 {level.max_steps} 以下（レベル {level.level_id}）: {too_far}"
        )

    bot = ExpertBot()
    seed_rng = np.random.default_rng(int(seed) & SEED_MASK)
    demos: List[Demo] = []

    def demo_at(i: int) -> Demo:
        while len(demos) <= i:
            demos.append(bot.solve(reset(level, int(seed_rng.integers(0, 2 ** 63 - 1)))))
        return demos[i]

    rates = {}
    for k in ks:
        rng = np.random.default_rng([int(seed) & SEED_MASK, k])
        n_walk = k if walk_len is None else walk_len
        hits = 0
        accepted = 0
        redrawn = 0
        i = 0
        while accepted < trials:
            demo = demo_at(i)
            i += 1
            if len(demo) < k:
                redrawn += 1
                if redrawn > trials * MAX_REDRAW_FACTOR:
                    raise UsageError(
                        f"レベル {level.level_id} で {k} 手以上のデモが得られません"
                        f"（{redrawn} 回引き直し）"
                    )
                continue
            start = replay(level, demo.seed, demo.actions[:len(demo) - k])
            hits += walk_reaches_goal(start, n_walk, rng)
            accepted += 1
        if redrawn:
            logger.warning("レベル %s k=%d: デモが短い試行を %d 回引き直しました", level.level_id, k, redrawn)
        rates[k] = hits / trials
    return rates


def random_walk_goal_rate(
    level: LevelSpec,
    k_steps: int,
    trials: int,
    seed: int,
    walk_len: Optional[int] = None,
) -> float:
    """ゴールの k 手前からランダムウォークしたときのゴール到達率"""
    return random_walk_goal_rates(level, [k_steps], trials, seed, walk_len)[k_steps]


def random_walk_table(
    level_ids: Sequence[str],
    ks: Sequence[int],
    trials: int,
    seed: int,
    walk_len: Optional[int] = None,
) -> pd.DataFrame:
    """ランダムウォーク到達率の表（行: レベル、列: k、値: %）"""
    rows = []
    for level_id in level_ids:
        rates = random_walk_goal_rates(cached_level(level_id), ks, trials, seed, walk_len)
        row: Dict[str, object] = {"level": level_id}
        for k in ks:
            row[str(k)] = round(100.0 * rates[k], 2)
        rows.append(row)
        ref = REFERENCE_RANDOM_WALK.get(level_id)
        if ref:
            logger.info("レベル %s の参考値: %s", level_id, ref)
    return pd.DataFrame(rows, columns=["level"] + [str(k) for k in ks])


# ============================================================================
# デモ統計
# ============================================================================

def demo_stats(demos: DemoSet) -> Tuple[float, int]:
    """デモ長の (平均, 最大)"""
    if not len(demos):
        raise UsageError("デモが空です")
    lengths = np.array([len(d) for d in demos.demos])
    return float(lengths.mean()), int(lengths.max())


def demo_stats_table(level_ids: Sequence[str], n: int, generation_seed: int) -> pd.DataFrame:
    """レベルごとのデモ長統計（参考値の列つき）"""
    rows = []
    for level_id in level_ids:
        avg, longest = demo_stats(gen_demos(cached_level(level_id), n, generation_seed))
        ref = REFERENCE_DEMO_STATS.get(level_id, {})
        rows.append({
            "level": level_id,
            "avg": round(avg, 2),
            "max": longest,
            "stages": longest - 1,
            "ref_avg": ref.get("avg"),
            "ref_max": ref.get("max"),
        })
    return pd.DataFrame(rows)


def demo_count_table(demos: DemoSet, counts: Sequence[int]) -> pd.DataFrame:
    """同じデモ集合の先頭 n 件ずつから作ったカリキュラムの比較表"""
    rows = []
    for n in counts:
        if not 1 <= n <= len(demos):
            raise UsageError(f"デモ数は 1..{len(demos)}: {n}")
        subset = demos.head(n)
        avg, longest = demo_stats(subset)
        curriculum = build_from_demos(subset)
        rows.append({
            "n_demos": n,
            "avg": round(avg, 2),
            "max": longest,
            "stages": curriculum.n_stages,
            "start_states": curriculum.total_states,
        })
    return pd.DataFrame(rows)
