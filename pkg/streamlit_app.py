"""
RCPPO ダッシュボード Streamlit版

実行ディレクトリの学習ログ・設定・集計を閲覧する
    streamlit run streamlit_app.py
"""

import streamlit as st
import sys
from pathlib import Path

# プロジェクトルートをパスに追加（Streamlit Cloud対応）
_project_root = Path(__file__).parent.resolve()
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

from core import RunService, get_run_service, clear_service_cache
from src.constants.defaults import ACCURACY_TARGETS, DEFAULT_RUN

# ============================================
# ページ設定
# ============================================
st.set_page_config(
    page_title="RCPPO ダッシュボード",
    page_icon="🧭",
    layout="wide",
    initial_sidebar_state="expanded"
)

st.markdown("""
<style>
    header[data-testid="stHeader"] { display: none !important; }
    footer { display: none !important; }
    .block-container { padding-top: 1.5rem !important; }
</style>
""", unsafe_allow_html=True)

# ============================================
# セッション状態
# ============================================
if 'runs_root' not in st.session_state:
    st.session_state.runs_root = DEFAULT_RUN["out_dir"]
if 'target' not in st.session_state:
    st.session_state.target = 0.95


def get_service() -> RunService:
    return get_run_service(st.session_state.runs_root)


# ============================================
# サイドバー
# ============================================
def sidebar():
    st.sidebar.title("実行ディレクトリ")
    st.session_state.runs_root = st.sidebar.text_input("親ディレクトリ", value=st.session_state.runs_root)
    if st.sidebar.button("再読み込み"):
        clear_service_cache()
    st.session_state.target = st.sidebar.selectbox(
        "目標精度",
        options=list(ACCURACY_TARGETS),
        index=list(ACCURACY_TARGETS).index(st.session_state.target),
    )
    run_ids = get_service().list_runs()
    if not run_ids:
        st.sidebar.info("実行が見つかりません")
        return []
    return st.sidebar.multiselect("表示する実行", options=run_ids, default=run_ids)


# ============================================
# メイン
# ============================================
def main_view(selected):
    st.title("RCPPO 学習結果")
    if not selected:
        st.write("左のサイドバーで実行を選んでください。`python main.py train ...` の出力先がここに並びます。")
        return

    service = get_service()
    results = service.load_runs(selected)
    for run_id, message in service.last_errors.items():
        st.warning(f"{run_id}: {message}")
    if not results:
        return

    tab_overview, tab_curves, tab_stage, tab_config = st.tabs(["一覧", "評価曲線", "ステージ", "設定"])

    with tab_overview:
        st.subheader("実行一覧")
        st.dataframe(service.overview_table(results), use_container_width=True)
        st.subheader("(レベル, モード) ごとの平均")
        st.dataframe(service.aggregate_table(results), use_container_width=True)
        st.subheader(f"精度 {st.session_state.target:g} までのフレーム数")
        st.dataframe(service.comparison(results, st.session_state.target), use_container_width=True)

    with tab_curves:
        st.caption("白抜きの点はカリキュラム完了前の評価（到達フレーム数の集計には含めない）")
        st.plotly_chart(service.create_eval_figure(results), use_container_width=True)

    with tab_stage:
        st.plotly_chart(service.create_stage_progress_figure(results), use_container_width=True)

    with tab_config:
        run_id = st.selectbox("実行", options=[r.run_id for r in results])
        result = next(r for r in results if r.run_id == run_id)
        st.code("\n".join(f"{k} = {v}" for k, v in result.config.items()), language="ini")


main_view(sidebar())
