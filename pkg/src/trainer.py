"""
PPO 学習ループ

エピソード終了後のリセットを、カリキュラムの現在のステージの開始状態に
限定する（カリキュラムを全ステージ通過した後、またはカリキュラムなしの
ベースラインでは通常のリセット分布を使う）。
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Deque, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .constants.defaults import DEFAULT_HYPERPARAMS
from .curriculum import Curriculum, StartState, draw_start
from .errors import RCPPOError, UsageError
from .gridworld import GridState, LevelSpec, observe, reset, step
from .metrics import eval_success_rate
from .neuralpolicy import (
    Adam,
    LossSpec,
    Minibatch,
    PolicyParams,
    clip_grad_norm,
    forward_batch,
    init_params,
    log_softmax,
    loss_and_grad,
    softmax,
)
from .scheduler import CurriculumScheduler, SchedulerConfig

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

# 学習中の成功率（ログ用）を計算する直近エピソード数
TRAIN_SUCCESS_WINDOW = 100

LOG_COLUMNS = [
    "run_id",
    "iteration",
    "frames",
    "stage",
    "train_success",
    "eval_success",
    "policy_loss",
    "value_loss",
    "entropy",
    "curriculum_done",
]


@dataclass(frozen=True)
class HyperParams:
    """PPO ハイパーパラメータ"""
    gamma: float = DEFAULT_HYPERPARAMS["gamma"]
    gae_lambda: float = DEFAULT_HYPERPARAMS["gae_lambda"]
    clip_eps: float = DEFAULT_HYPERPARAMS["clip_eps"]
    lr: float = DEFAULT_HYPERPARAMS["lr"]
    lr_decay: bool = DEFAULT_HYPERPARAMS["lr_decay"]
    epochs: int = DEFAULT_HYPERPARAMS["epochs"]
    minibatch_size: int = DEFAULT_HYPERPARAMS["minibatch_size"]
    horizon: int = DEFAULT_HYPERPARAMS["horizon"]
    workers: int = DEFAULT_HYPERPARAMS["workers"]
    entropy_coef: float = DEFAULT_HYPERPARAMS["entropy_coef"]
    value_coef: float = DEFAULT_HYPERPARAMS["value_coef"]
    max_grad_norm: float = DEFAULT_HYPERPARAMS["max_grad_norm"]
    frame_budget: int = DEFAULT_HYPERPARAMS["frame_budget"]
    hidden_size: int = DEFAULT_HYPERPARAMS["hidden_size"]
    eval_interval: int = DEFAULT_HYPERPARAMS["eval_interval"]
    eval_episodes: int = DEFAULT_HYPERPARAMS["eval_episodes"]
    stop_accuracy: float = DEFAULT_HYPERPARAMS["stop_accuracy"]
    stop_patience: int = DEFAULT_HYPERPARAMS["stop_patience"]

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise UsageError(f"gamma は (0, 1] の範囲: {self.gamma}")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise UsageError(f"gae_lambda は [0, 1] の範囲: {self.gae_lambda}")
        if self.clip_eps <= 0:
            raise UsageError(f"clip_eps は正の値: {self.clip_eps}")
        if self.lr <= 0:
            raise UsageError(f"lr は正の値: {self.lr}")
        for name in ("epochs", "minibatch_size", "horizon", "workers", "hidden_size",
                     "eval_interval", "eval_episodes", "stop_patience"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} は1以上: {getattr(self, name)}")
        if self.frame_budget < 0:
            raise UsageError(f"frame_budget は0以上: {self.frame_budget}")

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "HyperParams":
        known = {k: v for k, v in values.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    def loss_spec(self) -> LossSpec:
        return LossSpec(self.clip_eps, self.value_coef, self.entropy_coef)


# ============================================================================
# ロールアウト
# ============================================================================

@dataclass
class Trajectory:
    """
    1ワーカーの連続したステップ列（エピソード終了かホライズンで区切る）

    stage: このエピソードを開始したステージ（0 は通常のリセット）
    """
    worker_id: int
    stage: int
    views: List[np.ndarray] = field(default_factory=list)
    missions: List[np.ndarray] = field(default_factory=list)
    actions: List[int] = field(default_factory=list)
    log_probs: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    dones: List[bool] = field(default_factory=list)
    bootstrap_value: float = 0.0

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class EpisodeResult:
    """終了したエピソードの結果"""
    worker_id: int
    stage: int
    start: Optional[StartState]
    success: bool
    length: int
    reward: float


@dataclass
class RolloutBatch:
    """1イテレーション分のロールアウト"""
    trajectories: List[Trajectory]
    episodes: List[EpisodeResult]
    frames: int


class ResetSource:
    """エピソード開始状態の供給元（基底クラス）"""

    def reset(self, rng: np.random.Generator) -> Tuple[GridState, int, Optional[StartState]]:
        """(開始状態, ステージ, 開始状態のメタデータ) を返す"""
        raise NotImplementedError

    def report(self, stage: int, success: bool) -> None:
        """エピソードの成否を受け取る"""

    @property
    def completed(self) -> bool:
        return True

    @property
    def current_stage(self) -> int:
        return 0


def eval_round_seed(eval_seed: int, round_index: int) -> int:
    """評価の回ごとのシード（同じ実行の中で初期状態の列が重ならないようにする）"""
    seq = np.random.SeedSequence([int(eval_seed) & SEED_MASK, int(round_index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _fresh_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 63 - 1))


class NaturalResetSource(ResetSource):
    """レベル本来のリセット分布（ベースライン PPO）"""

    def __init__(self, level: LevelSpec):
        self.level = level

    def reset(self, rng: np.random.Generator) -> Tuple[GridState, int, Optional[StartState]]:
        return reset(self.level, _fresh_seed(rng)), 0, None


class CurriculumResetSource(ResetSource):
    """
    カリキュラムの現在のステージからリセットする供給元

    スケジューラがカリキュラム完了を報告した後は通常のリセット分布に戻る。
    """

    def __init__(self, level: LevelSpec, curriculum: Curriculum, scheduler: CurriculumScheduler):
        """
        初期化

        Args:
            level: レベル定義
            curriculum: カリキュラム
            scheduler: ステージを決めるスケジューラ
        """
        if curriculum.level_id != level.level_id:
            raise UsageError(
                f"カリキュラムのレベル ({curriculum.level_id}) と学習レベル ({level.level_id}) が一致しません"
            )
        self.level = level
        self.curriculum = curriculum
        self.scheduler = scheduler

    def reset(self, rng: np.random.Generator) -> Tuple[GridState, int, Optional[StartState]]:
        stage = self.scheduler.next_stage()
        if stage is None:
            return reset(self.level, _fresh_seed(rng)), 0, None
        start, state = draw_start(self.curriculum, stage, rng)
        return state, stage, start

    def report(self, stage: int, success: bool) -> None:
        if stage > 0:
            self.scheduler.record(stage, success)

    @property
    def completed(self) -> bool:
        return self.scheduler.completed

    @property
    def current_stage(self) -> int:
        if self.scheduler.completed:
            return self.curriculum.n_stages
        return self.scheduler.current_stage


class WorkerSlot:
    """ロックステップで進める環境スロット"""

    def __init__(self, worker_id: int, rng: np.random.Generator):
        self.worker_id = worker_id
        self.rng = rng
        self.state: Optional[GridState] = None
        self.stage = 0
        self.start: Optional[StartState] = None
        self.episode_length = 0

    def begin(self, source: ResetSource) -> None:
        try:
            self.state, self.stage, self.start = source.reset(self.rng)
        except RCPPOError as e:
            e.args = (f"ワーカー {self.worker_id}: {e}",)
            raise
        self.episode_length = 0


def collect_rollouts(
    params: PolicyParams,
    source: ResetSource,
    h: HyperParams,
    workers: List[WorkerSlot],
) -> RolloutBatch:
    """
    全ワーカーをホライズン分進めてロールアウトを集める

    各ステップで全ワーカーの観測をまとめて1回順伝播する。
    エピソードが終わるたびに結果を source に報告し、source から次の開始状態を引く。

    Args:
        params: 方策パラメータ（この間は変更しない）
        source: リセットの供給元
        h: ハイパーパラメータ
        workers: 環境スロット（状態はイテレーションをまたいで引き継ぐ）

    Returns:
        RolloutBatch
    """
    for w in workers:
        if w.state is None:
            w.begin(source)
    trajectories: List[Trajectory] = []
    current = [Trajectory(w.worker_id, w.stage) for w in workers]
    episodes: List[EpisodeResult] = []

    for _ in range(h.horizon):
        observations = [observe(w.state) for w in workers]
        views = np.stack([o.view for o in observations])
        missions = np.stack([o.mission_code for o in observations])
        logits, values = forward_batch(params, views, missions)
        logp = log_softmax(logits)
        cdf = np.cumsum(softmax(logits), axis=1)
        u = np.array([w.rng.random() for w in workers])
        actions = np.minimum(np.sum(cdf <= u[:, None], axis=1), logits.shape[1] - 1)

        for i, w in enumerate(workers):
            action = int(actions[i])
            try:
                w.state, reward, done = step(w.state, action)
            except RCPPOError as e:
                e.args = (f"ワーカー {w.worker_id}: {e}",)
                raise
            w.episode_length += 1
            traj = current[i]
            traj.views.append(views[i])
            traj.missions.append(missions[i])
            traj.actions.append(action)
            traj.log_probs.append(float(logp[i, action]))
            traj.values.append(float(values[i]))
            traj.rewards.append(float(reward))
            traj.dones.append(bool(done))
            if done:
                success = reward > 0
                episodes.append(EpisodeResult(
                    worker_id=w.worker_id,
                    stage=w.stage,
                    start=w.start,
                    success=success,
                    length=w.episode_length,
                    reward=float(reward),
                ))
                source.report(w.stage, success)
                trajectories.append(traj)
                w.begin(source)
                current[i] = Trajectory(w.worker_id, w.stage)

    # ホライズンで打ち切った分は現在の価値でブートストラップ
    open_trajs = [(i, t) for i, t in enumerate(current) if len(t)]
    if open_trajs:
        observations = [observe(workers[i].state) for i, _ in open_trajs]
        views = np.stack([o.view for o in observations])
        missions = np.stack([o.mission_code for o in observations])
        _, boot = forward_batch(params, views, missions)
        for (_, traj), value in zip(open_trajs, boot):
            traj.bootstrap_value = float(value)
            trajectories.append(traj)

    return RolloutBatch(trajectories, episodes, frames=h.horizon * len(workers))


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    bootstrap_value: float,
    gamma: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    一般化アドバンテージ推定

    δ_t = r_t + γ·v_{t+1}·(1 - done_t) - v_t
    A_t = δ_t + γλ·(1 - done_t)·A_{t+1}

    Returns:
        (アドバンテージ, リターン = アドバンテージ + 価値)
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if not len(rewards) == len(values) == len(dones):
        raise UsageError("rewards / values / dones の長さが一致しません")
    n = len(rewards)
    advantages = np.zeros(n)
    next_value = bootstrap_value
    next_adv = 0.0
    for t in range(n - 1, -1, -1):
        not_done = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * not_done - values[t]
        next_adv = delta + gamma * lam * not_done * next_adv
        advantages[t] = next_adv
        next_value = values[t]
    return advantages, advantages + values


def prepare_batch(batch: RolloutBatch, h: HyperParams) -> Minibatch:
    """ロールアウトに GAE を適用して1つの学習バッチにまとめる"""
    parts: Dict[str, List[np.ndarray]] = {k: [] for k in ("adv", "ret")}
    for traj in batch.trajectories:
        adv, ret = gae(traj.rewards, traj.values, traj.dones, traj.bootstrap_value, h.gamma, h.gae_lambda)
        parts["adv"].append(adv)
        parts["ret"].append(ret)
    trajs = batch.trajectories
    return Minibatch(
        views=np.stack([v for t in trajs for v in t.views]),
        missions=np.stack([m for t in trajs for m in t.missions]),
        actions=np.array([a for t in trajs for a in t.actions], dtype=np.int64),
        old_log_probs=np.array([lp for t in trajs for lp in t.log_probs]),
        advantages=np.concatenate(parts["adv"]),
        returns=np.concatenate(parts["ret"]),
    )


@dataclass(frozen=True)
class UpdateReport:
    """1回の PPO 更新の損失（ミニバッチ平均）"""
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """平均0・標準偏差1に正規化（標準偏差が 1e-8 未満なら何もしない）"""
    std = float(np.std(advantages))
    if std < 1e-8:
        logger.warning("アドバンテージの標準偏差が小さいため正規化を省略 (std=%.3g)", std)
        return advantages
    return (advantages - np.mean(advantages)) / std


def ppo_update(
    params: PolicyParams,
    data: Minibatch,
    h: HyperParams,
    optimizer: Optional[Adam] = None,
    rng: Optional[np.random.Generator] = None,
    lr: Optional[float] = None,
) -> Tuple[PolicyParams, UpdateReport]:
    """
    PPO の更新（エポックごとにシャッフルしたミニバッチで勾配ステップ）

    Args:
        params: 現在のパラメータ（変更しない）
        data: GAE 済みのバッチ（アドバンテージは正規化前）
        h: ハイパーパラメータ
        optimizer: Adam（None なら新規作成）
        rng: シャッフル用の乱数
        lr: 学習率（None なら h.lr）

    Returns:
        (更新後のパラメータ, 損失)
    """
    new_params = params.copy()
    optimizer = optimizer or Adam(new_params, h.lr)
    rng = rng or np.random.default_rng(0)
    data = Minibatch(
        views=data.views,
        missions=data.missions,
        actions=data.actions,
        old_log_probs=data.old_log_probs,
        advantages=normalize_advantages(data.advantages),
        returns=data.returns,
    )
    spec = h.loss_spec()
    reports = []
    n = len(data)
    for _ in range(h.epochs):
        order = rng.permutation(n)
        for start in range(0, n, h.minibatch_size):
            mb = data.take(order[start:start + h.minibatch_size])
            report, grads = loss_and_grad(new_params, mb, spec)
            clip_grad_norm(grads, h.max_grad_norm)
            optimizer.step(new_params, grads, lr)
            reports.append(report)
    return new_params, UpdateReport(
        policy_loss=float(np.mean([r.policy for r in reports])),
        value_loss=float(np.mean([r.value for r in reports])),
        entropy=float(np.mean([r.entropy for r in reports])),
        clip_fraction=float(np.mean([r.clip_fraction for r in reports])),
    )


# ============================================================================
# 学習ログ
# ============================================================================

@dataclass
class IterationRecord:
    """1イテレーションの記録"""
    run_id: str
    iteration: int
    frames: int
    stage: int
    train_success: Optional[float]
    eval_success: Optional[float]
    policy_loss: float
    value_loss: float
    entropy: float
    curriculum_done: bool


@dataclass
class TrainingLog:
    """
    イテレーションごとの記録と実行メタデータ

    frames は厳密に増加する。eval_success は評価しなかったイテレーションでは None。
    """
    run_id: str
    records: List[IterationRecord] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def append(self, record: IterationRecord) -> None:
        if self.records and record.frames <= self.records[-1].frames:
            raise UsageError(
                f"frames は増加する必要があります ({self.records[-1].frames} → {record.frames})"
            )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def eval_points(self) -> List[Tuple[int, float, bool]]:
        """(frames, 評価成功率, カリキュラム完了後か) の一覧"""
        return [
            (r.frames, r.eval_success, r.curriculum_done)
            for r in self.records
            if r.eval_success is not None
        ]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "run_id": r.run_id,
                "iteration": r.iteration,
                "frames": r.frames,
                "stage": r.stage,
                "train_success": r.train_success,
                "eval_success": r.eval_success,
                "policy_loss": r.policy_loss,
                "value_loss": r.value_loss,
                "entropy": r.entropy,
                "curriculum_done": int(r.curriculum_done),
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=LOG_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.6f", lineterminator="\n")

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "TrainingLog":
        missing = [c for c in LOG_COLUMNS if c not in df.columns]
        if missing:
            raise UsageError(f"学習ログに列が不足しています: {missing}")
        run_id = str(df["run_id"].iloc[0]) if len(df) else ""
        log = cls(run_id)

        def _opt(value) -> Optional[float]:
            return None if pd.isna(value) else float(value)

        for row in df.itertuples(index=False):
            log.append(IterationRecord(
                run_id=str(row.run_id),
                iteration=int(row.iteration),
                frames=int(row.frames),
                stage=int(row.stage),
                train_success=_opt(row.train_success),
                eval_success=_opt(row.eval_success),
                policy_loss=float(row.policy_loss),
                value_loss=float(row.value_loss),
                entropy=float(row.entropy),
                curriculum_done=bool(int(row.curriculum_done)),
            ))
        return log

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TrainingLog":
        return cls.from_frame(pd.read_csv(path))


# ============================================================================
# 学習
# ============================================================================

class Trainer:
    """
    RCPPO / PPO の学習を実行するクラス

    カリキュラムを渡さなければベースライン PPO になる。

    使用例:
        trainer = Trainer(level, HyperParams(frame_budget=200_000), curriculum=c)
        log = trainer.run()
        trainer.params  # 学習後のパラメータ
    """

    def __init__(
        self,
        level: LevelSpec,
        h: HyperParams,
        curriculum: Optional[Curriculum] = None,
        scheduler_cfg: Optional[SchedulerConfig] = None,
        run_seed: int = 0,
        run_id: str = "run",
        deterministic: bool = False,
        on_iteration: Optional[Callable[[IterationRecord], None]] = None,
    ):
        """
        初期化

        Args:
            level: 学習するレベル
            h: ハイパーパラメータ
            curriculum: カリキュラム（None ならベースライン）
            scheduler_cfg: スケジューラ設定
            run_seed: 実行シード（初期パラメータ・ワーカー・評価の乱数をすべて派生）
            run_id: ログに書く実行名
            deterministic: True のときワーカー1つで実行
            on_iteration: イテレーションごとに呼ぶコールバック
        """
        self.level = level
        self.h = h
        self.curriculum = curriculum
        self.scheduler_cfg = scheduler_cfg or SchedulerConfig()
        self.run_seed = run_seed
        self.run_id = run_id
        self.deterministic = deterministic
        self.on_iteration = on_iteration

        n_workers = 1 if deterministic else h.workers
        seq = np.random.SeedSequence(int(run_seed) & SEED_MASK)
        init_seq, shuffle_seq, sched_seq, eval_seq, *worker_seqs = seq.spawn(4 + n_workers)
        self.params = init_params(h.hidden_size, int(init_seq.generate_state(1)[0]))
        self.optimizer = Adam(self.params, h.lr)
        self.shuffle_rng = np.random.default_rng(shuffle_seq)
        self.eval_seed = int(eval_seq.generate_state(1)[0])
        self.workers = [WorkerSlot(i, np.random.default_rng(s)) for i, s in enumerate(worker_seqs)]

        if curriculum is not None:
            self.scheduler: Optional[CurriculumScheduler] = CurriculumScheduler(
                self.scheduler_cfg, curriculum.n_stages, np.random.default_rng(sched_seq)
            )
            self.source: ResetSource = CurriculumResetSource(level, curriculum, self.scheduler)
        else:
            self.scheduler = None
            self.source = NaturalResetSource(level)

        self.log = TrainingLog(run_id, metadata={
            "level": level.level_id,
            "run_seed": run_seed,
            "eval_seed": self.eval_seed,
            "workers": n_workers,
            "hyperparams": h.to_dict(),
            "scheduler": self.scheduler_cfg.to_dict() if curriculum is not None else None,
            "curriculum_stages": curriculum.n_stages if curriculum is not None else 0,
        })

    def run(self, log_path: Optional[Union[str, Path]] = None) -> TrainingLog:
        """
        フレーム予算を使い切るか、評価成功率が続けて目標に達するまで学習

        Args:
            log_path: 指定時は終了時（異常終了時も）に CSV を書き出す

        Returns:
            TrainingLog
        """
        try:
            self._loop()
        except BaseException:
            if log_path is not None:
                self.log.to_csv(log_path)
                logger.error("学習を中断しました。途中までのログを %s に保存", log_path)
            raise
        if log_path is not None:
            self.log.to_csv(log_path)
        return self.log

    def _loop(self) -> None:
        h = self.h
        frames = 0
        iteration = 0
        streak = 0
        eval_round = 0
        recent: Deque[bool] = deque(maxlen=TRAIN_SUCCESS_WINDOW)

        while frames < h.frame_budget:
            iteration += 1
            batch = collect_rollouts(self.params, self.source, h, self.workers)
            frames += batch.frames
            recent.extend(ep.success for ep in batch.episodes)

            lr = h.lr * max(1.0 - (frames - batch.frames) / h.frame_budget, 0.0) if h.lr_decay else h.lr
            data = prepare_batch(batch, h)
            self.params, report = ppo_update(self.params, data, h, self.optimizer, self.shuffle_rng, lr)

            eval_success = None
            counted = self.source.completed
            if iteration % h.eval_interval == 0:
                eval_round += 1
                eval_report = eval_success_rate(
                    self.params, self.level, h.eval_episodes,
                    eval_round_seed(self.eval_seed, eval_round), frames=frames,
                )
                eval_success = eval_report.success_rate
                if counted and eval_success >= h.stop_accuracy:
                    streak += 1
                else:
                    streak = 0
                logger.info(
                    "[%s] iter %d frames %d stage %d 評価成功率 %.3f%s",
                    self.run_id, iteration, frames, self.source.current_stage, eval_success,
                    "" if counted else "（カリキュラム中のため集計外）",
                )
            else:
                logger.debug("[%s] iter %d frames %d stage %d", self.run_id, iteration, frames, self.source.current_stage)

            record = IterationRecord(
                run_id=self.run_id,
                iteration=iteration,
                frames=frames,
                stage=self.source.current_stage,
                train_success=(sum(recent) / len(recent)) if recent else None,
                eval_success=eval_success,
                policy_loss=report.policy_loss,
                value_loss=report.value_loss,
                entropy=report.entropy,
                curriculum_done=counted,
            )
            self.log.append(record)
            if self.on_iteration is not None:
                self.on_iteration(record)

            if streak >= h.stop_patience:
                logger.info("[%s] 評価成功率が %d 回連続で %.2f 以上のため終了", self.run_id, streak, h.stop_accuracy)
                break


def train(
    level: LevelSpec,
    curriculum: Optional[Curriculum],
    scheduler_cfg: Optional[SchedulerConfig],
    h: HyperParams,
    run_seed: int,
    run_id: str = "run",
    deterministic: bool = False,
) -> TrainingLog:
    """Trainer の簡易呼び出し（curriculum=None でベースライン PPO）"""
    trainer = Trainer(level, h, curriculum, scheduler_cfg, run_seed, run_id, deterministic)
    return trainer.run()
