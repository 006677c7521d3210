"""
アクター・クリティックのネットワーク（numpy 実装）

観測（7×7×3 の符号）とミッション符号から、行動ロジットと状態価値を出す。
順伝播・逆伝播とも手書きで、PPO の損失の勾配を解析的に求める。

構造:
    観測 one-hot → tanh → ┐
                           ├ 連結 → tanh → tanh → 行動ヘッド（7）
    ミッション one-hot → tanh ┘                  └ 価値ヘッド（1）
"""

import logging
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CorruptFileError, NumericError, UsageError
from .gridworld import N_ACTIONS, Observation, VIEW_SIZE
from .gridworld.objects import N_COLOR_CODES, N_DOOR_CODES, N_OBJECT_CODES
from .gridworld.state import Task

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1

# セルごとの one-hot 幅（オブジェクト・色・ドア状態）
CELL_FEATURES = N_OBJECT_CODES + N_COLOR_CODES + N_DOOR_CODES
OBS_FEATURES = VIEW_SIZE * VIEW_SIZE * CELL_FEATURES
# ミッション符号 (task, 対象, 色, 第2対象, 色) の one-hot 幅
MISSION_FIELD_SIZES = (len(Task), N_OBJECT_CODES, N_COLOR_CODES, N_OBJECT_CODES, N_COLOR_CODES)
MISSION_FEATURES = sum(MISSION_FIELD_SIZES)
_MISSION_OFFSETS = np.cumsum((0,) + MISSION_FIELD_SIZES[:-1])

PARAM_NAMES = (
    "obs_w", "obs_b",
    "mission_w", "mission_b",
    "trunk1_w", "trunk1_b",
    "trunk2_w", "trunk2_b",
    "actor_w", "actor_b",
    "critic_w", "critic_b",
)

_EYE_OBJ = np.eye(N_OBJECT_CODES)
_EYE_COLOR = np.eye(N_COLOR_CODES)
_EYE_DOOR = np.eye(N_DOOR_CODES)


def param_shapes(hidden_size: int) -> Dict[str, Tuple[int, ...]]:
    h = hidden_size
    return {
        "obs_w": (OBS_FEATURES, h), "obs_b": (h,),
        "mission_w": (MISSION_FEATURES, h), "mission_b": (h,),
        "trunk1_w": (2 * h, h), "trunk1_b": (h,),
        "trunk2_w": (h, h), "trunk2_b": (h,),
        "actor_w": (h, N_ACTIONS), "actor_b": (N_ACTIONS,),
        "critic_w": (h, 1), "critic_b": (1,),
    }


@dataclass
class PolicyParams:
    """
    ネットワークのパラメータ（名前 → 配列）

    勾配も同じ形の PolicyParams として扱う。
    """
    tensors: Dict[str, np.ndarray]

    def __post_init__(self):
        missing = [n for n in PARAM_NAMES if n not in self.tensors]
        if missing:
            raise UsageError(f"パラメータが不足しています: {missing}")
        expected = param_shapes(self.hidden_size)
        for name in PARAM_NAMES:
            if self.tensors[name].shape != expected[name]:
                raise UsageError(
                    f"{name} の形が不正: {self.tensors[name].shape}（期待値 {expected[name]}）"
                )

    @property
    def hidden_size(self) -> int:
        return int(self.tensors["obs_b"].shape[0])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def copy(self) -> "PolicyParams":
        return PolicyParams({n: t.copy() for n, t in self.tensors.items()})

    def zeros_like(self) -> "PolicyParams":
        return PolicyParams({n: np.zeros_like(t) for n, t in self.tensors.items()})

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(t)) for t in self.tensors.values())

    def global_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(t * t) for t in self.tensors.values())))


Gradients = PolicyParams


def _orthogonal(shape: Tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_params(hidden_size: int, seed: int) -> PolicyParams:
    """
    直交初期化したパラメータを作る（ゲイン 1.0、出力ヘッドは 0.01）

    Args:
        hidden_size: 隠れ層の幅
        seed: 乱数シード
    """
    if hidden_size < 1:
        raise UsageError(f"hidden_size は1以上: {hidden_size}")
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in param_shapes(hidden_size).items():
        if name.endswith("_b"):
            tensors[name] = np.zeros(shape)
        else:
            gain = 0.01 if name in ("actor_w", "critic_w") else 1.0
            tensors[name] = _orthogonal(shape, gain, rng)
    return PolicyParams(tensors)


# ============================================================================
# 入力の符号化
# ============================================================================

def encode_views(views: np.ndarray) -> np.ndarray:
    """(B, 7, 7, 3) の観測符号を (B, OBS_FEATURES) の one-hot に"""
    views = np.asarray(views, dtype=np.int64)
    onehot = np.concatenate(
        [_EYE_OBJ[views[..., 0]], _EYE_COLOR[views[..., 1]], _EYE_DOOR[views[..., 2]]],
        axis=-1,
    )
    return onehot.reshape(views.shape[0], OBS_FEATURES)


def encode_missions(missions: np.ndarray) -> np.ndarray:
    """(B, 5) のミッション符号を (B, MISSION_FEATURES) の one-hot に"""
    missions = np.asarray(missions, dtype=np.int64)
    out = np.zeros((missions.shape[0], MISSION_FEATURES))
    rows = np.arange(missions.shape[0])[:, None]
    out[rows, missions + _MISSION_OFFSETS] = 1.0
    return out


def stack_observations(observations: Sequence[Observation]) -> Tuple[np.ndarray, np.ndarray]:
    """Observation の列を (views, missions) の配列にまとめる"""
    views = np.stack([o.view for o in observations])
    missions = np.stack([o.mission_code for o in observations])
    return views, missions


# ============================================================================
# 順伝播
# ============================================================================

def _check(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError("非有限値を検出しました", layer=name)


def _forward(p: PolicyParams, views: np.ndarray, missions: np.ndarray) -> Dict[str, np.ndarray]:
    x_obs = encode_views(views)
    x_mis = encode_missions(missions)
    h_obs = np.tanh(x_obs @ p["obs_w"] + p["obs_b"])
    _check("obs", h_obs)
    h_mis = np.tanh(x_mis @ p["mission_w"] + p["mission_b"])
    _check("mission", h_mis)
    z = np.concatenate([h_obs, h_mis], axis=1)
    h1 = np.tanh(z @ p["trunk1_w"] + p["trunk1_b"])
    _check("trunk1", h1)
    h2 = np.tanh(h1 @ p["trunk2_w"] + p["trunk2_b"])
    _check("trunk2", h2)
    logits = h2 @ p["actor_w"] + p["actor_b"]
    _check("actor", logits)
    values = (h2 @ p["critic_w"] + p["critic_b"])[:, 0]
    _check("critic", values)
    return {
        "x_obs": x_obs, "x_mis": x_mis, "h_obs": h_obs, "h_mis": h_mis,
        "z": z, "h1": h1, "h2": h2, "logits": logits, "values": values,
    }


def forward_batch(p: PolicyParams, views: np.ndarray, missions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    バッチの順伝播

    Returns:
        (ロジット (B, 7), 価値 (B,))
    """
    cache = _forward(p, views, missions)
    return cache["logits"], cache["values"]


def forward(p: PolicyParams, obs: Observation) -> Tuple[np.ndarray, float]:
    """1観測の順伝播（ロジット 7 個と価値）"""
    logits, values = forward_batch(p, obs.view[None], obs.mission_code[None])
    return logits[0], float(values[0])


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def entropy(logits: np.ndarray) -> np.ndarray:
    """方策のエントロピー（非負、一様分布で ln 7）"""
    logp = log_softmax(logits)
    return -np.sum(np.exp(logp) * logp, axis=-1)


def sample_action(logits: np.ndarray, rng: np.random.Generator, greedy: bool = False) -> int:
    """
    softmax(logits) から行動をサンプリング

    greedy=True のときは最大ロジットの行動（同値なら小さい番号）
    """
    return int(sample_actions(np.asarray(logits)[None], rng, greedy)[0])


def sample_actions(logits: np.ndarray, rng: np.random.Generator, greedy: bool = False) -> np.ndarray:
    """バッチ版 sample_action"""
    if greedy:
        return np.argmax(logits, axis=-1)
    probs = softmax(logits)
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(logits.shape[0])[:, None]
    # 丸め誤差で cdf[-1] < u となる場合は最後の行動
    return np.minimum(np.sum(cdf <= u, axis=-1), logits.shape[-1] - 1)


# ============================================================================
# 損失と逆伝播
# ============================================================================

@dataclass(frozen=True)
class LossSpec:
    """PPO 損失の係数"""
    clip_eps: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01


@dataclass
class Minibatch:
    """PPO 更新用のミニバッチ"""
    views: np.ndarray
    missions: np.ndarray
    actions: np.ndarray
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self) -> int:
        return int(self.actions.shape[0])

    def take(self, index: np.ndarray) -> "Minibatch":
        return Minibatch(
            views=self.views[index],
            missions=self.missions[index],
            actions=self.actions[index],
            old_log_probs=self.old_log_probs[index],
            advantages=self.advantages[index],
            returns=self.returns[index],
        )


@dataclass(frozen=True)
class LossReport:
    """損失の内訳"""
    total: float
    policy: float
    value: float
    entropy: float
    clip_fraction: float


def loss_and_grad(p: PolicyParams, mb: Minibatch, spec: LossSpec) -> Tuple[LossReport, PolicyParams]:
    """
    PPO 損失（クリップ付き方策損失 + 価値損失 - エントロピー）と解析勾配

    total = policy + value_coef * value - entropy_coef * entropy

    Args:
        p: パラメータ
        mb: ミニバッチ（空でないこと）
        spec: 損失の係数

    Returns:
        (損失の内訳, 勾配)
    """
    n = len(mb)
    if n == 0:
        raise UsageError("ミニバッチが空です")
    cache = _forward(p, mb.views, mb.missions)
    logits, values = cache["logits"], cache["values"]
    rows = np.arange(n)
    actions = np.asarray(mb.actions, dtype=np.int64)

    logp = log_softmax(logits)
    probs = np.exp(logp)
    logp_a = logp[rows, actions]
    ratio = np.exp(logp_a - mb.old_log_probs)
    adv = mb.advantages
    surr1 = ratio * adv
    surr2 = np.clip(ratio, 1.0 - spec.clip_eps, 1.0 + spec.clip_eps) * adv
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))
    value_loss = float(np.mean((values - mb.returns) ** 2))
    ent = -np.sum(probs * logp, axis=1)
    mean_entropy = float(np.mean(ent))
    total = policy_loss + spec.value_coef * value_loss - spec.entropy_coef * mean_entropy
    if not np.isfinite(total):
        raise NumericError(
            f"損失が非有限です (policy={policy_loss}, value={value_loss}, entropy={mean_entropy})",
            layer="loss",
        )

    # 方策損失: クリップ側が選ばれてかつ比率が範囲外なら勾配0
    unclipped = surr1 <= surr2
    d_logp_a = np.where(unclipped, -adv * ratio, 0.0) / n
    onehot = np.zeros_like(logits)
    onehot[rows, actions] = 1.0
    d_logits = d_logp_a[:, None] * (onehot - probs)
    # エントロピー項: d(-c·H)/dlogits = c·π(logπ + H)
    d_logits += (spec.entropy_coef / n) * probs * (logp + ent[:, None])
    d_values = spec.value_coef * 2.0 * (values - mb.returns) / n

    grads = _backward(p, cache, d_logits, d_values)
    clip_fraction = float(np.mean(np.abs(ratio - 1.0) > spec.clip_eps))
    report = LossReport(total, policy_loss, value_loss, mean_entropy, clip_fraction)
    return report, grads


def _backward(
    p: PolicyParams,
    cache: Dict[str, np.ndarray],
    d_logits: np.ndarray,
    d_values: np.ndarray,
) -> PolicyParams:
    h = p.hidden_size
    g: Dict[str, np.ndarray] = {}
    h2 = cache["h2"]
    g["actor_w"] = h2.T @ d_logits
    g["actor_b"] = d_logits.sum(axis=0)
    g["critic_w"] = h2.T @ d_values[:, None]
    g["critic_b"] = np.array([d_values.sum()])
    d_h2 = d_logits @ p["actor_w"].T + d_values[:, None] @ p["critic_w"].T

    d_a2 = d_h2 * (1.0 - h2 ** 2)
    g["trunk2_w"] = cache["h1"].T @ d_a2
    g["trunk2_b"] = d_a2.sum(axis=0)
    d_h1 = d_a2 @ p["trunk2_w"].T

    d_a1 = d_h1 * (1.0 - cache["h1"] ** 2)
    g["trunk1_w"] = cache["z"].T @ d_a1
    g["trunk1_b"] = d_a1.sum(axis=0)
    d_z = d_a1 @ p["trunk1_w"].T

    d_obs = d_z[:, :h] * (1.0 - cache["h_obs"] ** 2)
    g["obs_w"] = cache["x_obs"].T @ d_obs
    g["obs_b"] = d_obs.sum(axis=0)
    d_mis = d_z[:, h:] * (1.0 - cache["h_mis"] ** 2)
    g["mission_w"] = cache["x_mis"].T @ d_mis
    g["mission_b"] = d_mis.sum(axis=0)

    for name, grad in g.items():
        _check(f"grad:{name}", grad)
    return PolicyParams(g)


def backward(p: PolicyParams, mb: Minibatch, spec: LossSpec) -> Tuple[float, PolicyParams]:
    """損失と勾配（loss_and_grad の簡易版）"""
    report, grads = loss_and_grad(p, mb, spec)
    return report.total, grads


# ============================================================================
# 最適化
# ============================================================================

def clip_grad_norm(grads: PolicyParams, max_norm: float) -> float:
    """全体ノルムが max_norm を超えたら縮小する（その場で更新）。クリップ前のノルムを返す"""
    norm = grads.global_norm()
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / (norm + 1e-6)
        for t in grads.tensors.values():
            t *= scale
    return norm


class Adam:
    """Adam オプティマイザ（β1 0.9, β2 0.999, eps 1e-8）"""

    def __init__(self, params: PolicyParams, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        """
        初期化

        Args:
            params: 最適化するパラメータ（形だけ使う）
            lr: 学習率
        """
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, params: PolicyParams, grads: PolicyParams, lr: Optional[float] = None) -> None:
        """パラメータをその場で更新"""
        lr = self.lr if lr is None else lr
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for name in PARAM_NAMES:
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params.tensors[name] -= lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


# ============================================================================
# チェックポイント
# ============================================================================

def save_params(path: Union[str, Path], p: PolicyParams) -> None:
    """パラメータを .npz で保存（形とバージョンを含む）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.savez(f, format_version=np.array(CHECKPOINT_FORMAT_VERSION), **p.tensors)


def load_params(path: Union[str, Path]) -> PolicyParams:
    """save_params で保存したパラメータを読み込む"""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            if "format_version" not in data.files:
                raise CorruptFileError("format_version がありません", str(path))
            version = int(data["format_version"])
            if version != CHECKPOINT_FORMAT_VERSION:
                raise CorruptFileError(f"未対応のチェックポイント形式: {version}", str(path))
            tensors = {name: data[name] for name in PARAM_NAMES if name in data.files}
    except (ValueError, KeyError, zipfile.BadZipFile) as e:
        raise CorruptFileError(f"チェックポイントを読み込めません ({e})", str(path)) from e
    try:
        params = PolicyParams(tensors)
    except UsageError as e:
        raise CorruptFileError(str(e), str(path)) from e
    if not params.all_finite():
        raise CorruptFileError("非有限値を含むパラメータです", str(path))
    return params
