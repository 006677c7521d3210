"""
実行ディレクトリ

1回の学習実行の出力（設定エコー・学習ログ・チェックポイント・要約・カリキュラム）を
1つのディレクトリにまとめる。

    runs/goto_local_rcppo_s0/
        config.txt       実効設定（--config で再実行可能）
        log.csv          TrainingLog
        checkpoint.npz   学習後のパラメータ
        summary.json     目標精度ごとの到達フレーム数
        curriculum.json  使ったカリキュラム（カリキュラムありの実行のみ）
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Union

from .config import RunConfig, read_config_file
from .errors import CorruptFileError, UsageError
from .metrics import RunSummary, summarize_run
from .trainer import TrainingLog

CONFIG_FILE = "config.txt"
LOG_FILE = "log.csv"
CHECKPOINT_FILE = "checkpoint.npz"
SUMMARY_FILE = "summary.json"
CURRICULUM_FILE = "curriculum.json"


def prepare_run_dir(cfg: RunConfig) -> Path:
    """実行ディレクトリを作り、設定エコーを書き出す"""
    run_dir = cfg.run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / CONFIG_FILE).write_text(cfg.echo(), encoding="utf-8")
    return run_dir


def write_summary(run_dir: Union[str, Path], summary: RunSummary, metadata: Dict[str, Any]) -> Path:
    path = Path(run_dir) / SUMMARY_FILE
    data = summary.to_dict()
    data["metadata"] = metadata
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")
    return path


def is_run_dir(path: Union[str, Path]) -> bool:
    path = Path(path)
    return (path / CONFIG_FILE).exists() and (path / LOG_FILE).exists()


def list_run_dirs(root: Union[str, Path]) -> List[Path]:
    """root 直下の実行ディレクトリ（名前順）"""
    root = Path(root)
    if not root.is_dir():
        return []
    return sorted(p for p in root.iterdir() if p.is_dir() and is_run_dir(p))


def read_run_config(run_dir: Union[str, Path]) -> Dict[str, str]:
    """config.txt を key → 値（文字列）の辞書として読む"""
    return read_config_file(Path(run_dir) / CONFIG_FILE)


def load_run_log(run_dir: Union[str, Path]) -> TrainingLog:
    path = Path(run_dir) / LOG_FILE
    if not path.exists():
        raise UsageError(f"学習ログが見つかりません: {path}")
    try:
        return TrainingLog.from_csv(path)
    except (ValueError, KeyError) as e:
        raise CorruptFileError(f"学習ログを読めません: {e}", str(path)) from e


def load_run_summary(run_dir: Union[str, Path]) -> RunSummary:
    """設定エコーと学習ログから RunSummary を作り直す"""
    config = read_run_config(run_dir)
    log = load_run_log(run_dir)
    if not log.run_id:
        log.run_id = config.get("run_id", Path(run_dir).name)
    return summarize_run(log, config.get("level", "?"), config.get("mode", "?"))
