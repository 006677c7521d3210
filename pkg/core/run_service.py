"""
実行結果サービス - UI非依存のコアロジック

実行ディレクトリ（config.txt / log.csv / summary.json）を読み込み、
ダッシュボードや他のUIから同じ形で使えるようにする。
"""

from dataclasses import dataclass
from typing import Dict, Any, List, Optional
from pathlib import Path

# srcモジュールからインポート
import sys
_base_path = Path(__file__).parent.parent.resolve()
if str(_base_path) not in sys.path:
    sys.path.insert(0, str(_base_path))

import pandas as pd
import plotly.graph_objects as go

from src.constants.defaults import ACCURACY_TARGETS
from src.errors import RCPPOError
from src.metrics import RunSummary, comparison_table, summarize_run, summarize_runs
from src.rundir import list_run_dirs, load_run_log, read_run_config
from src.visualizer import create_eval_curve_figure, create_stage_figure


@dataclass
class RunResult:
    """1実行の読み込み結果を保持するデータクラス"""
    run_id: str
    run_dir: Path
    config: Dict[str, str]
    log: pd.DataFrame
    summary: RunSummary

    @property
    def level(self) -> str:
        return self.config.get("level", "?")

    @property
    def mode(self) -> str:
        return self.config.get("mode", "?")

    @property
    def scheduler(self) -> str:
        return self.config.get("scheduler.mode", "-") if self.mode != "ppo" else "-"

    @property
    def final_stage(self) -> int:
        """最後に記録されたステージ（ベースラインは0）"""
        return int(self.log["stage"].iloc[-1]) if not self.log.empty else 0

    @property
    def curriculum_done(self) -> bool:
        return bool(not self.log.empty and int(self.log["curriculum_done"].iloc[-1]) == 1)


class RunService:
    """
    実行結果サービス - UI非依存のコアサービスクラス

    使用例:
        service = RunService("runs")
        for result in service.load_runs():
            print(result.run_id, result.summary.frames_to_accuracy)
        fig = service.create_eval_figure(service.load_runs())
    """

    def __init__(self, runs_root: str = "runs"):
        """
        初期化

        Args:
            runs_root: 実行ディレクトリをまとめた親ディレクトリ
        """
        self.runs_root = Path(runs_root)
        self.last_errors: Dict[str, str] = {}

    def list_runs(self) -> List[str]:
        """実行名の一覧"""
        return [p.name for p in list_run_dirs(self.runs_root)]

    def load_run(self, run_id: str) -> RunResult:
        """
        1実行を読み込む

        Raises:
            RCPPOError: ログが壊れている・見つからない
        """
        run_dir = self.runs_root / run_id
        config = read_run_config(run_dir)
        log = load_run_log(run_dir)
        summary = summarize_run(log, config.get("level", "?"), config.get("mode", "?"), ACCURACY_TARGETS)
        return RunResult(
            run_id=run_id,
            run_dir=run_dir,
            config=config,
            log=log.to_frame(),
            summary=summary,
        )

    def load_runs(self, run_ids: Optional[List[str]] = None) -> List[RunResult]:
        """
        複数の実行を読み込む（読めない実行はスキップして errors に記録）

        Args:
            run_ids: 読み込む実行名（None なら全件）
        """
        results = []
        self.last_errors = {}
        for run_id in run_ids if run_ids is not None else self.list_runs():
            try:
                results.append(self.load_run(run_id))
            except (RCPPOError, OSError) as e:
                self.last_errors[run_id] = str(e)
        return results

    @staticmethod
    def overview_table(results: List[RunResult]) -> pd.DataFrame:
        """実行の一覧表（目標精度ごとの到達フレーム数つき）"""
        rows = []
        for r in results:
            row: Dict[str, Any] = {
                "run_id": r.run_id,
                "level": r.level,
                "mode": r.mode,
                "scheduler": r.scheduler,
                "frames": r.summary.total_frames,
                "final_eval": r.summary.final_eval,
                "stage": r.final_stage,
                "curriculum_done": r.curriculum_done,
            }
            for target, frames in r.summary.frames_to_accuracy.items():
                row[f"frames_to_{target:g}"] = frames
            rows.append(row)
        return pd.DataFrame(rows)

    @staticmethod
    def aggregate_table(results: List[RunResult]) -> pd.DataFrame:
        return summarize_runs([r.summary for r in results])

    @staticmethod
    def comparison(results: List[RunResult], target: float = 0.95) -> pd.DataFrame:
        return comparison_table([r.summary for r in results], target)

    @staticmethod
    def create_eval_figure(results: List[RunResult]) -> go.Figure:
        return create_eval_curve_figure({r.run_id: r.log for r in results})

    @staticmethod
    def create_stage_progress_figure(results: List[RunResult]) -> go.Figure:
        return create_stage_figure({r.run_id: r.log for r in results})


# ============================================
# キャッシュ
# ============================================

# シングルトンキャッシュ（UIフレームワーク非依存）
_service_cache: Dict[str, RunService] = {}


def get_run_service(runs_root: str = "runs", use_cache: bool = True) -> RunService:
    """
    RunServiceのインスタンスを取得（キャッシュ対応）

    Args:
        runs_root: 実行ディレクトリの親
        use_cache: キャッシュを使用するかどうか

    Returns:
        RunService インスタンス
    """
    key = str(Path(runs_root).resolve())
    if use_cache and key in _service_cache:
        return _service_cache[key]

    service = RunService(runs_root=runs_root)

    if use_cache:
        _service_cache[key] = service

    return service


def clear_service_cache(runs_root: Optional[str] = None):
    """
    サービスキャッシュをクリア

    Args:
        runs_root: 特定のディレクトリのみクリアする場合はそのパス、全てクリアする場合はNone
    """
    global _service_cache
    if runs_root:
        _service_cache.pop(str(Path(runs_root).resolve()), None)
    else:
        _service_cache.clear()
