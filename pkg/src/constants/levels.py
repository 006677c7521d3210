"""
レベル定義テーブル

BabyAIのレベルを縮小再現したアナログの一覧。
部屋サイズは壁を含む一辺のセル数（隣接する部屋は壁を共有する）。

カテゴリ:
- small: 1部屋または2部屋（1×1, 1×2）
- large: 2×2以上の部屋配置
"""

from typing import Any, Dict

# ミッション系列
MISSION_GOTO = "goto"
MISSION_PICKUP = "pickup"
MISSION_OPEN = "open"
MISSION_PUTNEXT = "putnext"
MISSION_UNLOCK_PICKUP = "unlock_pickup"

MISSION_FAMILIES = (
    MISSION_GOTO,
    MISSION_PICKUP,
    MISSION_OPEN,
    MISSION_PUTNEXT,
    MISSION_UNLOCK_PICKUP,
)

# max_steps = MAX_STEPS_FACTOR × room_size × max(rows, cols)
MAX_STEPS_FACTOR = 8

# 生成の再試行上限（ミッションが初期状態で達成済み・到達不能な配置など）
GENERATOR_MAX_RETRIES = 200

# レベルレジストリ
# target: 固定ターゲット（None の場合はランダム）
# distractor_colors: 妨害オブジェクトの色の候補（None の場合は全色）
LEVEL_REGISTRY: Dict[str, Dict[str, Any]] = {
    "goto_redball": {
        "name": "GoToRedBall",
        "category": "small",
        "room_size": 8,
        "rooms": (1, 1),
        "distractors": 7,
        "mission": MISSION_GOTO,
        "target": ("ball", "red"),
    },
    "goto_redball_grey": {
        "name": "GoToRedBallGrey",
        "category": "small",
        "room_size": 8,
        "rooms": (1, 1),
        "distractors": 7,
        "mission": MISSION_GOTO,
        "target": ("ball", "red"),
        "distractor_colors": ("grey",),
    },
    "goto_local": {
        "name": "GoToLocal",
        "category": "small",
        "room_size": 8,
        "rooms": (1, 1),
        "distractors": 7,
        "mission": MISSION_GOTO,
    },
    "pickup_local": {
        "name": "PickupLocal",
        "category": "small",
        "room_size": 8,
        "rooms": (1, 1),
        "distractors": 7,
        "mission": MISSION_PICKUP,
    },
    "putnext_local": {
        "name": "PutNextLocal",
        "category": "small",
        "room_size": 8,
        "rooms": (1, 1),
        "distractors": 6,
        "mission": MISSION_PUTNEXT,
    },
    "unlock_pickup": {
        "name": "UnlockPickup",
        "category": "small",
        "room_size": 6,
        "rooms": (1, 2),
        "distractors": 0,
        "mission": MISSION_UNLOCK_PICKUP,
        "locked_door": True,
    },
    "unlock_pickup_dist": {
        "name": "UnlockPickupDist",
        "category": "small",
        "room_size": 6,
        "rooms": (1, 2),
        "distractors": 4,
        "mission": MISSION_UNLOCK_PICKUP,
        "locked_door": True,
    },
    "blocked_unlock_pickup": {
        "name": "BlockedUnlockPickup",
        "category": "small",
        "room_size": 6,
        "rooms": (1, 2),
        "distractors": 0,
        "mission": MISSION_UNLOCK_PICKUP,
        "locked_door": True,
        "blocked": True,
    },
    "open": {
        "name": "Open",
        "category": "large",
        "room_size": 8,
        "rooms": (3, 3),
        "distractors": 6,
        "mission": MISSION_OPEN,
    },
    "goto": {
        "name": "GoTo",
        "category": "large",
        "room_size": 8,
        "rooms": (3, 3),
        "distractors": 18,
        "mission": MISSION_GOTO,
    },
    "pickup": {
        "name": "Pickup",
        "category": "large",
        "room_size": 8,
        "rooms": (3, 3),
        "distractors": 18,
        "mission": MISSION_PICKUP,
    },
}

# BabyAI上での参考値（デモ長の平均・最大）。統計表の比較列に使用する
REFERENCE_DEMO_STATS: Dict[str, Dict[str, float]] = {
    "goto_redball": {"avg": 6.2, "max": 21},
    "goto_redball_grey": {"avg": 6.8, "max": 24},
    "goto_local": {"avg": 6.4, "max": 23},
    "pickup_local": {"avg": 7.0, "max": 23},
    "putnext_local": {"avg": 13.0, "max": 56},
    "unlock_pickup": {"avg": 20.4, "max": 31},
    "unlock_pickup_dist": {"avg": 26.7, "max": 68},
    "open": {"avg": 30.1, "max": 186},
    "blocked_unlock_pickup": {"avg": 35.3, "max": 47},
    "goto": {"avg": 52.9, "max": 208},
    "pickup": {"avg": 53.9, "max": 209},
}

# BabyAI上での参考値（ゴールからkステップ手前でランダムウォークしたときのゴール到達率 %）
REFERENCE_RANDOM_WALK: Dict[str, Dict[int, float]] = {
    "goto_local": {1: 34.4, 2: 10.2, 3: 4.5, 4: 3.6, 5: 3.1},
    "putnext_local": {1: 26.5, 2: 6.3, 3: 1.8, 4: 0.01, 5: 0.01},
}
