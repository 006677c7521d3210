"""
出力フォーマッター

デモ統計・カリキュラム・評価・実行要約を文字列でフォーマットする
"""

from typing import Dict, List, Optional

import pandas as pd

from .constants.levels import REFERENCE_DEMO_STATS
from .curriculum import COMBINE_NONE, Curriculum
from .metrics import EvalReport, RunSummary


class ReportFormatter:
    """CLI 向けのテキスト出力を担当するクラス"""

    WIDTH = 60

    def _header(self, title: str) -> List[str]:
        return ["=" * self.WIDTH, f"【{title}】", "=" * self.WIDTH]

    def format_demo_stats(self, level_id: str, n: int, avg: float, longest: int, path: Optional[str] = None) -> str:
        """
        デモ統計をフォーマット

        Args:
            level_id: レベル識別子
            n: デモ数
            avg: 平均長
            longest: 最大長
            path: 保存先（表示用）

        Returns:
            フォーマットされた文字列
        """
        lines = self._header("デモ統計")
        lines.append(f"レベル: {level_id}")
        lines.append(f"デモ数: {n}")
        lines.append(f"平均長: {avg:.2f}")
        lines.append(f"最大長: {longest}（カリキュラムのステージ数 {longest - 1}）")
        ref = REFERENCE_DEMO_STATS.get(level_id)
        if ref:
            lines.append(f"参考値: 平均 {ref['avg']} / 最大 {ref['max']}")
        if path:
            lines.append(f"保存先: {path}")
        return "\n".join(lines)

    def format_curriculum(self, c: Curriculum, path: Optional[str] = None) -> str:
        """カリキュラムのステージ数と各ステージの大きさ"""
        lines = self._header("カリキュラム")
        lines.append(f"レベル: {c.level_id}")
        lines.append(f"種別: {c.source}")
        lines.append(f"結合: {c.combine_plan.label()}")
        lines.append(f"ステージ数: {c.n_stages}")
        lines.append(f"開始状態の総数: {c.total_states}")
        lines.append("-" * self.WIDTH)
        for i, size in enumerate(c.stage_sizes(), start=1):
            rate = ""
            if c.discard_rates is not None and c.combine_plan.mode == COMBINE_NONE:
                rate = f"（破棄率 {100 * c.discard_rates[i - 1]:.1f}%）"
            lines.append(f"  ステージ {i:>3}: {size} 状態{rate}")
        if path:
            lines.append("-" * self.WIDTH)
            lines.append(f"保存先: {path}")
        return "\n".join(lines)

    def format_eval(self, level_id: str, report: EvalReport, label: str = "") -> str:
        lines = self._header(f"評価{' - ' + label if label else ''}")
        lines.append(f"レベル: {level_id}")
        lines.append(f"エピソード数: {report.episodes}")
        lines.append(f"成功率: {report.success_rate:.3f}")
        lines.append(f"平均エピソード長: {report.mean_length:.1f}")
        return "\n".join(lines)

    def format_summary(self, summary: RunSummary, run_dir: Optional[str] = None) -> str:
        """学習結果の要約（目標精度ごとの到達フレーム数）"""
        lines = self._header("学習結果")
        lines.append(f"実行: {summary.run_id}")
        lines.append(f"レベル: {summary.level_id} / モード: {summary.mode}")
        lines.append(f"総フレーム数: {summary.total_frames:,}")
        if summary.final_eval is not None:
            lines.append(f"最終評価成功率: {summary.final_eval:.3f}")
        lines.append("-" * self.WIDTH)
        for target, frames in summary.frames_to_accuracy.items():
            value = f"{frames:,}" if frames is not None else "-（未到達）"
            lines.append(f"  精度 {target:.2f} までのフレーム数: {value}")
        if run_dir:
            lines.append("-" * self.WIDTH)
            lines.append(f"出力先: {run_dir}")
        return "\n".join(lines)

    def format_table(self, title: str, df: pd.DataFrame, notes: Optional[Dict[str, str]] = None) -> str:
        """pandas の表をタイトルつきで整形"""
        lines = self._header(title)
        lines.append(df.to_string(index=False) if not df.empty else "（データなし）")
        for key, note in (notes or {}).items():
            lines.append(f"{key}: {note}")
        return "\n".join(lines)
