"""
既定値テーブル

ハイパーパラメータ・スケジューラ・実行設定の既定値。
設定ファイルとCLIフラグはこれらを上書きする（CLI > ファイル > 既定値）。
"""

from typing import Any, Dict

# ============================================================================
# PPOハイパーパラメータ
# ============================================================================
DEFAULT_HYPERPARAMS: Dict[str, Any] = {
    "gamma": 0.99,
    "gae_lambda": 0.95,
    "clip_eps": 0.2,
    "lr": 1e-3,
    "lr_decay": False,       # 線形減衰（既定ではオフ）
    "epochs": 4,
    "minibatch_size": 256,
    "horizon": 128,          # ワーカーあたりのロールアウト長
    "workers": 16,
    "entropy_coef": 0.01,
    "value_coef": 0.5,
    "max_grad_norm": 0.5,
    "frame_budget": 2_000_000,
    "hidden_size": 64,
    # 評価
    "eval_interval": 10,     # 何イテレーションごとに評価するか
    "eval_episodes": 128,
    # 早期終了: 評価成功率が stop_accuracy 以上を stop_patience 回連続
    "stop_accuracy": 0.99,
    "stop_patience": 2,
}

# ============================================================================
# カリキュラムスケジューラ
# ============================================================================
SCHEDULER_MODES = ("fixed_threshold", "graduated", "tscl")
TSCL_VARIANTS = ("online", "window")

DEFAULT_SCHEDULER: Dict[str, Any] = {
    "mode": "fixed_threshold",
    "threshold": 0.90,
    "start_threshold": 0.70,
    "end_threshold": 0.99,
    "window": 100,
    "min_episodes": 50,
    "epsilon": 0.1,
    "smoothing": 0.1,
    "tscl_variant": "online",
    "tscl_window": 10,
}

# ============================================================================
# 実行設定
# ============================================================================
RUN_MODES = ("ppo", "rcppo", "rcppo_randomwalk")

DEFAULT_RUN: Dict[str, Any] = {
    "level": "goto_redball",
    "mode": "ppo",
    "combine": "none",
    "n_demos": 1000,
    "demo_seed": 1,
    "walk_stages": 10,
    "walk_seed": 0,
    "seed": 0,
    "out_dir": "runs",
    "deterministic": False,
}

# frames-to-accuracy の集計対象
ACCURACY_TARGETS = (0.9, 0.95, 0.99)

# ランダムウォーク統計の既定
RANDOM_WALK_TRIALS = 10000
RANDOM_WALK_LEN = 5  # k によらず揃える歩数（stats randwalk --walk-len 5）
