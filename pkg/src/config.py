"""
実行設定

RunConfig と、フラットな key=value 形式の設定ファイルの読み書き。
優先順位は CLI > 設定ファイル > 既定値。

設定ファイルの例:
    # GoToLocal を RCPPO で学習
    level = goto_local
    mode = rcppo
    demos = demos/goto_local.jsonl
    scheduler.mode = graduated
    ppo.lr = 0.0005
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .constants.defaults import DEFAULT_RUN, RUN_MODES
from .curriculum import CombinePlan
from .errors import UsageError
from .gridworld import get_level
from .scheduler import SchedulerConfig
from .trainer import HyperParams

SCHEDULER_PREFIX = "scheduler."
PPO_PREFIX = "ppo."

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


@dataclass(frozen=True)
class RunConfig:
    """
    1回の学習実行の設定

    Attributes:
        level: レベル識別子
        mode: ppo / rcppo / rcppo_randomwalk
        combine: ステージ結合（none / fixed:N / exp）
        n_demos: 使うデモ数（ファイルの先頭から）
        walk_stages: ランダムウォークカリキュラムのステージ数
        walk_seed: ランダムウォークのシード
        seed: 実行シード
        out_dir: 出力ディレクトリ（実行ごとにサブディレクトリを作る）
        deterministic: ワーカー1つの決定的モード
        run_id: 実行名（None なら自動）
        demos: デモファイル
        curriculum: カリキュラムファイル
        scheduler: スケジューラ設定
        ppo: PPO ハイパーパラメータ
    """
    level: str = DEFAULT_RUN["level"]
    mode: str = DEFAULT_RUN["mode"]
    combine: str = DEFAULT_RUN["combine"]
    n_demos: int = DEFAULT_RUN["n_demos"]
    walk_stages: int = DEFAULT_RUN["walk_stages"]
    walk_seed: int = DEFAULT_RUN["walk_seed"]
    seed: int = DEFAULT_RUN["seed"]
    out_dir: str = DEFAULT_RUN["out_dir"]
    deterministic: bool = DEFAULT_RUN["deterministic"]
    run_id: Optional[str] = None
    demos: Optional[str] = None
    curriculum: Optional[str] = None
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    ppo: HyperParams = field(default_factory=HyperParams)

    def __post_init__(self):
        if self.mode not in RUN_MODES:
            raise UsageError(f"未知のモード: {self.mode}（{', '.join(RUN_MODES)}）")
        get_level(self.level)
        CombinePlan.parse(self.combine)
        if self.n_demos < 1:
            raise UsageError(f"n_demos は1以上: {self.n_demos}")
        if self.walk_stages < 1:
            raise UsageError(f"walk_stages は1以上: {self.walk_stages}")

    @property
    def effective_run_id(self) -> str:
        return self.run_id or f"{self.level}_{self.mode}_s{self.seed}"

    @property
    def run_dir(self) -> Path:
        return Path(self.out_dir) / self.effective_run_id

    def validate_for_launch(self) -> None:
        """
        実行開始前の整合性チェック

        Raises:
            UsageError: rcppo でデモもカリキュラムもない、ファイルが存在しない等
        """
        if self.mode == "rcppo" and not (self.demos or self.curriculum):
            raise UsageError("rcppo モードにはデモファイル (--demos) かカリキュラムファイル (--curriculum) が必要です")
        if self.mode == "rcppo_randomwalk" and not self.demos:
            raise UsageError("rcppo_randomwalk モードにはデモファイル (--demos) が必要です")
        for path in (self.demos, self.curriculum):
            if path and not Path(path).exists():
                raise UsageError(f"ファイルが見つかりません: {path}")

    # ------------------------------------------------------------------
    # フラット表現
    # ------------------------------------------------------------------

    def to_flat(self) -> Dict[str, Any]:
        """ドット区切りのキーを持つフラットな辞書"""
        flat: Dict[str, Any] = {}
        for f in fields(self):
            if f.name in ("scheduler", "ppo"):
                continue
            flat[f.name] = getattr(self, f.name)
        flat["run_id"] = self.effective_run_id
        for key, value in self.scheduler.to_dict().items():
            flat[SCHEDULER_PREFIX + key] = value
        for key, value in self.ppo.to_dict().items():
            flat[PPO_PREFIX + key] = value
        return flat

    def echo(self) -> str:
        """config.txt に書く設定エコー（--config でそのまま再実行できる）"""
        lines = ["# 実効設定（--config で再実行可能）"]
        for key, value in self.to_flat().items():
            if value is None:
                continue
            lines.append(f"{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


# ============================================================================
# 読み込み
# ============================================================================

def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise UsageError(f"{key} は真偽値（true/false）: {text}")


def _coerce(key: str, text: str, default: Any) -> Any:
    """既定値の型に合わせて文字列を変換"""
    text = text.strip()
    try:
        if isinstance(default, bool):
            return _parse_bool(key, text)
        if isinstance(default, int):
            return int(text.replace("_", ""))
        if isinstance(default, float):
            return float(text)
    except ValueError as e:
        raise UsageError(f"{key} の値が不正です: {text}") from e
    if text.lower() in ("", "none"):
        return None
    return text


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """
    key=value 形式のテキストを辞書にする

    空行と # 以降は無視する。同じキーは後勝ち。

    Raises:
        UsageError: = のない行
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{lineno}: key=value 形式ではありません: {raw.strip()}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"設定ファイルが見つかりません: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def parse_overrides(items: List[str]) -> Dict[str, str]:
    """--set key=value の並びを辞書にする"""
    values: Dict[str, str] = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--set は key=value 形式: {item}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _split(values: Dict[str, str]) -> Tuple[Dict[str, str], Dict[str, str], Dict[str, str]]:
    top: Dict[str, str] = {}
    sched: Dict[str, str] = {}
    ppo: Dict[str, str] = {}
    for key, value in values.items():
        if key.startswith(SCHEDULER_PREFIX):
            sched[key[len(SCHEDULER_PREFIX):]] = value
        elif key.startswith(PPO_PREFIX):
            ppo[key[len(PPO_PREFIX):]] = value
        else:
            top[key] = value
    return top, sched, ppo


def _typed(values: Dict[str, str], defaults: Dict[str, Any], prefix: str) -> Dict[str, Any]:
    typed: Dict[str, Any] = {}
    for key, text in values.items():
        if key not in defaults:
            raise UsageError(f"未知の設定キー: {prefix}{key}")
        typed[key] = _coerce(prefix + key, text, defaults[key])
    return typed


def build_run_config(
    file_values: Optional[Dict[str, str]] = None,
    cli_values: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    既定値 < 設定ファイル < CLI の順で RunConfig を組み立てる

    Args:
        file_values: 設定ファイルの key=value（文字列）
        cli_values: CLI で明示されたフラット値（文字列または型つき、None は未指定）

    Returns:
        RunConfig
    """
    merged: Dict[str, Any] = dict(file_values or {})
    for key, value in (cli_values or {}).items():
        if value is not None:
            merged[key] = value

    top, sched, ppo = _split({k: (v if isinstance(v, str) else _format_value(v)) for k, v in merged.items()})

    base = RunConfig.__dataclass_fields__
    top_defaults = {
        name: (f.default if f.default is not None else "")
        for name, f in base.items()
        if name not in ("scheduler", "ppo")
    }
    top_typed = _typed(top, top_defaults, "")
    sched_typed = _typed(sched, SchedulerConfig().to_dict(), SCHEDULER_PREFIX)
    ppo_typed = _typed(ppo, HyperParams().to_dict(), PPO_PREFIX)

    return replace(
        RunConfig(),
        **top_typed,
        scheduler=SchedulerConfig.from_dict(sched_typed),
        ppo=HyperParams.from_dict(ppo_typed),
    )
