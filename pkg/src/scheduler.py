"""
カリキュラムスケジューラ

いつ次のステージへ進むかを決める。
- fixed_threshold: 直近の成功率が一定のしきい値（既定 90%）に達したら進む
- graduated: しきい値を 70% から 99% までステージごとに線形に上げる
- tscl: 学習進捗（成功率の傾き）の絶対値が大きいステージを ε-greedy で選ぶ
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Optional

import numpy as np

from .constants.defaults import DEFAULT_SCHEDULER, SCHEDULER_MODES, TSCL_VARIANTS
from .errors import UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SchedulerConfig:
    """スケジューラ設定"""
    mode: str = DEFAULT_SCHEDULER["mode"]
    threshold: float = DEFAULT_SCHEDULER["threshold"]
    start_threshold: float = DEFAULT_SCHEDULER["start_threshold"]
    end_threshold: float = DEFAULT_SCHEDULER["end_threshold"]
    window: int = DEFAULT_SCHEDULER["window"]
    min_episodes: int = DEFAULT_SCHEDULER["min_episodes"]
    epsilon: float = DEFAULT_SCHEDULER["epsilon"]
    smoothing: float = DEFAULT_SCHEDULER["smoothing"]
    tscl_variant: str = DEFAULT_SCHEDULER["tscl_variant"]
    tscl_window: int = DEFAULT_SCHEDULER["tscl_window"]

    def __post_init__(self):
        if self.mode not in SCHEDULER_MODES:
            raise UsageError(f"未知のスケジューラモード: {self.mode}（{', '.join(SCHEDULER_MODES)}）")
        if self.tscl_variant not in TSCL_VARIANTS:
            raise UsageError(f"未知の TSCL 方式: {self.tscl_variant}（{', '.join(TSCL_VARIANTS)}）")
        for name in ("threshold", "start_threshold", "end_threshold"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise UsageError(f"{name} は (0, 1] の範囲: {value}")
        if self.start_threshold > self.end_threshold:
            raise UsageError("start_threshold は end_threshold 以下である必要があります")
        if not self.window >= self.min_episodes >= 1:
            raise UsageError(
                f"window ≥ min_episodes ≥ 1 である必要があります (window={self.window}, min_episodes={self.min_episodes})"
            )
        if not 0.0 <= self.epsilon <= 1.0:
            raise UsageError(f"epsilon は [0, 1] の範囲: {self.epsilon}")
        if not 0.0 < self.smoothing <= 1.0:
            raise UsageError(f"smoothing は (0, 1] の範囲: {self.smoothing}")
        if self.tscl_window < 2:
            raise UsageError(f"tscl_window は2以上: {self.tscl_window}")

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "SchedulerConfig":
        known = {k: v for k, v in values.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass
class SchedulerState:
    """
    スケジューラの状態（学習ループ1つが所有する）

    Attributes:
        n_stages: ステージ数
        current_stage: 現在のステージ（1始まり）
        windows: ステージごとの直近の成否
        episodes: ステージごとの記録エピソード数
        progress: ステージごとの学習進捗の推定値（tscl）
        completed: 全ステージを通過したか
    """
    n_stages: int
    window: int
    current_stage: int = 1
    windows: List[Deque[bool]] = field(default_factory=list)
    episodes: List[int] = field(default_factory=list)
    progress: List[float] = field(default_factory=list)
    last_rate: List[Optional[float]] = field(default_factory=list)
    rate_history: List[Deque[float]] = field(default_factory=list)
    completed: bool = False

    @classmethod
    def initial(cls, n_stages: int, cfg: SchedulerConfig) -> "SchedulerState":
        if n_stages < 1:
            raise UsageError(f"ステージ数は1以上: {n_stages}")
        return cls(
            n_stages=n_stages,
            window=cfg.window,
            windows=[deque(maxlen=cfg.window) for _ in range(n_stages)],
            episodes=[0] * n_stages,
            progress=[0.0] * n_stages,
            last_rate=[None] * n_stages,
            rate_history=[deque(maxlen=cfg.tscl_window) for _ in range(n_stages)],
        )

    def success_rate(self, stage: int) -> Optional[float]:
        """ステージの直近の成功率（記録がなければ None）"""
        window = self.windows[stage - 1]
        if not window:
            return None
        return sum(window) / len(window)


def stage_threshold(cfg: SchedulerConfig, stage: int, n_stages: int) -> float:
    """
    ステージの昇格しきい値

    Args:
        cfg: スケジューラ設定
        stage: ステージ番号（1始まり）
        n_stages: ステージ数

    Returns:
        しきい値（graduated モードでは start から end まで線形）
    """
    if not 1 <= stage <= n_stages:
        raise UsageError(f"ステージ番号は 1..{n_stages}: {stage}")
    if cfg.mode != "graduated":
        return cfg.threshold
    if n_stages == 1:
        return cfg.end_threshold
    span = cfg.end_threshold - cfg.start_threshold
    return cfg.start_threshold + span * (stage - 1) / (n_stages - 1)


def _window_slope(values: Deque[float]) -> float:
    """等間隔の系列に最小二乗で当てはめた直線の傾き"""
    y = np.asarray(values, dtype=np.float64)
    x = np.arange(len(y), dtype=np.float64)
    x -= x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def record_episode(
    s: SchedulerState,
    stage: int,
    success: bool,
    cfg: Optional[SchedulerConfig] = None,
) -> SchedulerState:
    """
    エピソードの成否を記録

    Args:
        s: スケジューラ状態（その場で更新して返す）
        stage: エピソードを開始したステージ
        success: 報酬 > 0 で終わったか
        cfg: tscl モードのとき学習進捗の更新に使う設定

    Returns:
        更新後の状態
    """
    if not 1 <= stage <= s.n_stages:
        raise UsageError(f"ステージ番号は 1..{s.n_stages}: {stage}")
    i = stage - 1
    s.windows[i].append(bool(success))
    s.episodes[i] += 1

    if cfg is not None and cfg.mode == "tscl":
        rate = s.success_rate(stage)
        if cfg.tscl_variant == "online":
            if s.last_rate[i] is not None:
                delta = rate - s.last_rate[i]
                s.progress[i] = cfg.smoothing * delta + (1.0 - cfg.smoothing) * s.progress[i]
            s.last_rate[i] = rate
        else:
            s.rate_history[i].append(rate)
            if len(s.rate_history[i]) >= 2:
                s.progress[i] = _window_slope(s.rate_history[i])
    return s


def should_advance(s: SchedulerState, cfg: SchedulerConfig, n_stages: int) -> bool:
    """現在のステージの成功率がしきい値に達したか"""
    if s.completed:
        return False
    window = s.windows[s.current_stage - 1]
    if len(window) < cfg.min_episodes:
        return False
    rate = sum(window) / len(window)
    return rate >= stage_threshold(cfg, s.current_stage, n_stages)


def tscl_select_stage(s: SchedulerState, rng: np.random.Generator, epsilon: float) -> int:
    """
    学習進捗の絶対値に基づく ε-greedy のステージ選択

    同値のときは番号の小さいステージを選ぶ。
    """
    if s.n_stages == 1:
        return 1
    if rng.random() < epsilon:
        return int(rng.integers(s.n_stages)) + 1
    return int(np.argmax(np.abs(s.progress))) + 1


class CurriculumScheduler:
    """
    学習ループから使うスケジューラ

    使用例:
        scheduler = CurriculumScheduler(cfg, curriculum.n_stages, rng)
        stage = scheduler.next_stage()
        scheduler.record(stage, success)
    """

    def __init__(self, cfg: SchedulerConfig, n_stages: int, rng: np.random.Generator):
        """
        初期化

        Args:
            cfg: スケジューラ設定
            n_stages: カリキュラムのステージ数
            rng: tscl のステージ選択に使う乱数
        """
        self.cfg = cfg
        self.n_stages = n_stages
        self.rng = rng
        self.state = SchedulerState.initial(n_stages, cfg)

    @property
    def completed(self) -> bool:
        return self.state.completed

    @property
    def current_stage(self) -> int:
        return self.state.current_stage

    def next_stage(self) -> Optional[int]:
        """次のリセットに使うステージ（完了後は None = 通常のリセット分布）"""
        if self.state.completed:
            return None
        if self.cfg.mode == "tscl":
            stage = tscl_select_stage(self.state, self.rng, self.cfg.epsilon)
            self.state.current_stage = stage
            return stage
        return self.state.current_stage

    def record(self, stage: int, success: bool) -> None:
        """エピソード結果を記録し、必要ならステージを進める"""
        if self.state.completed:
            return
        record_episode(self.state, stage, success, self.cfg)
        if self.cfg.mode == "tscl":
            if self._tscl_done():
                self.state.completed = True
                logger.info("TSCL: 全 %d ステージがしきい値に到達、カリキュラム完了", self.n_stages)
            return
        while should_advance(self.state, self.cfg, self.n_stages):
            rate = self.state.success_rate(self.state.current_stage)
            logger.info(
                "ステージ %d/%d を通過（成功率 %.3f）",
                self.state.current_stage, self.n_stages, rate,
            )
            if self.state.current_stage >= self.n_stages:
                self.state.completed = True
                logger.info("カリキュラム完了")
                break
            self.state.current_stage += 1

    def _tscl_done(self) -> bool:
        for stage in range(1, self.n_stages + 1):
            if self.state.episodes[stage - 1] < self.cfg.min_episodes:
                return False
            if self.state.success_rate(stage) < self.cfg.threshold:
                return False
        return True
