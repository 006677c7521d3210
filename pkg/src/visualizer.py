"""
学習曲線の可視化モジュール

学習ログの評価成功率・カリキュラムのステージ推移を Plotly で描画する
"""

from pathlib import Path
from typing import Dict, List, Union

import pandas as pd
import plotly.graph_objects as go

from .errors import UsageError
from .rundir import load_run_log

# 実行ごとの線の色（順に使い回す）
RUN_COLORS = [
    "rgba(31, 119, 180, 1)",   # 青
    "rgba(255, 127, 14, 1)",   # オレンジ
    "rgba(44, 160, 44, 1)",    # 緑
    "rgba(214, 39, 40, 1)",    # 赤
    "rgba(148, 103, 189, 1)",  # 紫
    "rgba(140, 86, 75, 1)",    # 茶
]


def get_run_color(index: int) -> str:
    """実行番号に対応する色を取得"""
    return RUN_COLORS[index % len(RUN_COLORS)]


def _base_layout(fig: go.Figure, title: str, y_title: str) -> None:
    fig.update_layout(
        title=dict(text=title, font=dict(size=18), x=0.5, xanchor="center"),
        font=dict(size=12, family="Arial, sans-serif"),
        xaxis=dict(title="フレーム数"),
        yaxis=dict(title=y_title),
        height=480,
        margin=dict(l=40, r=20, t=60, b=40),
        legend=dict(orientation="h", y=-0.2),
        paper_bgcolor="rgba(0,0,0,0)",
    )


def create_eval_curve_figure(logs: Dict[str, pd.DataFrame]) -> go.Figure:
    """
    評価成功率の推移を描画

    カリキュラム完了前の評価点は白抜き、完了後は塗りつぶしで表示する。

    Args:
        logs: 実行名 → 学習ログ（TrainingLog.to_frame() の形式）

    Returns:
        Plotly Figure オブジェクト
    """
    fig = go.Figure()
    for i, (name, df) in enumerate(logs.items()):
        points = df[df["eval_success"].notna()]
        if points.empty:
            continue
        color = get_run_color(i)
        done = points["curriculum_done"].astype(int) == 1
        fig.add_trace(go.Scatter(
            x=points["frames"],
            y=points["eval_success"],
            mode="lines+markers",
            name=name,
            line=dict(color=color, width=2),
            marker=dict(
                color=[color if d else "white" for d in done],
                line=dict(color=color, width=1.5),
                size=7,
            ),
            hovertemplate="<b>" + name + "</b><br>frames %{x}<br>成功率 %{y:.3f}<extra></extra>",
        ))
    _base_layout(fig, "評価成功率の推移", "成功率")
    fig.update_yaxes(range=[0, 1.02])
    return fig


def create_stage_figure(logs: Dict[str, pd.DataFrame]) -> go.Figure:
    """カリキュラムのステージの推移を階段状に描画"""
    fig = go.Figure()
    for i, (name, df) in enumerate(logs.items()):
        if df.empty or int(df["stage"].max()) == 0:
            continue
        fig.add_trace(go.Scatter(
            x=df["frames"],
            y=df["stage"],
            mode="lines",
            line=dict(color=get_run_color(i), width=2, shape="hv"),
            name=name,
        ))
    _base_layout(fig, "カリキュラムのステージ", "ステージ")
    return fig


def save_figure(fig: go.Figure, path: Union[str, Path]) -> Path:
    """
    図をファイルに保存

    .html は単体で開ける HTML、.svg / .png は kaleido が必要。
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix == ".html":
        fig.write_html(str(path), include_plotlyjs="cdn")
    elif suffix in (".svg", ".png"):
        try:
            fig.write_image(str(path))
        except (ValueError, ImportError) as e:
            raise UsageError(f"{suffix} で保存するには kaleido が必要です ({e})") from e
    else:
        raise UsageError(f"未対応の出力形式: {suffix}（.html / .svg / .png）")
    return path


def load_run_logs(run_dirs: List[Union[str, Path]]) -> Dict[str, pd.DataFrame]:
    """実行ディレクトリの log.csv をまとめて読み込む（実行名はディレクトリ名）"""
    return {Path(run_dir).name: load_run_log(run_dir).to_frame() for run_dir in run_dirs}
