"""
コマンドラインインターフェース

サブコマンド:
    demo-gen          エキスパートのデモを生成
    build-curriculum  デモからカリキュラムを構築
    train             PPO / RCPPO で学習
    eval              チェックポイント・エキスパート・ランダム方策を評価
    stats             ランダムウォーク到達率・デモ統計などの表と図

終了コード: 0 成功 / 2 使い方の誤り / 1 実行時エラー
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from .config import RunConfig, build_run_config, parse_overrides, read_config_file
from .constants.defaults import (
    ACCURACY_TARGETS,
    DEFAULT_HYPERPARAMS,
    DEFAULT_RUN,
    RANDOM_WALK_LEN,
    RANDOM_WALK_TRIALS,
    RUN_MODES,
    SCHEDULER_MODES,
    TSCL_VARIANTS,
)
from .curriculum import (
    SOURCE_DEMOS,
    SOURCE_RANDOM_WALK,
    CombinePlan,
    Curriculum,
    build_from_demos,
    build_random_walk,
    combine_stages,
    goal_states_from_demos,
    read_curriculum,
    write_curriculum,
)
from .errors import RCPPOError, UsageError
from .expert import DemoSet, ExpertAgent, gen_demos, read_demos, write_demos
from .formatter import ReportFormatter
from .gridworld import LevelSpec, get_level, list_levels
from .metrics import (
    RandomAgent,
    comparison_table,
    demo_count_table,
    demo_stats,
    demo_stats_table,
    eval_success_rate,
    random_walk_table,
    summarize_run,
    summarize_runs,
)
from .neuralpolicy import load_params, save_params
from .rundir import CHECKPOINT_FILE, CURRICULUM_FILE, LOG_FILE, load_run_summary, prepare_run_dir, write_summary
from .trainer import Trainer
from .visualizer import create_eval_curve_figure, load_run_logs, save_figure

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def setup_logging(verbose: bool = False) -> None:
    """ルートロガーを設定（既定 INFO、-v で DEBUG）"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


# ============================================================================
# 引数の解釈
# ============================================================================

def parse_int_list(text: str) -> List[int]:
    """
    "1..5" または "100,500,1000" を整数のリストにする

    Raises:
        UsageError: 形式が不正
    """
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if lo_i > hi_i:
                raise UsageError(f"範囲の指定が逆です: {text}")
            return list(range(lo_i, hi_i + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise UsageError(f"整数のリストとして解釈できません: {text}") from e


def parse_levels(text: str) -> List[str]:
    level_ids = [part.strip() for part in text.split(",") if part.strip()]
    for level_id in level_ids:
        get_level(level_id)
    return level_ids


def _load_demos(path: str, level_id: Optional[str] = None, n: Optional[int] = None) -> DemoSet:
    demos = read_demos(path)
    if level_id is not None and demos.level_id != level_id:
        raise UsageError(f"デモのレベル ({demos.level_id}) が指定のレベル ({level_id}) と一致しません")
    if n is not None:
        if n > len(demos):
            logger.debug("デモ数 %d に対してファイルには %d 件（すべて使用）", n, len(demos))
        demos = demos.head(n)
    return demos


def _make_curriculum(
    level: LevelSpec,
    demos: DemoSet,
    source: str,
    combine: str,
    walk_stages: int,
    walk_seed: int,
) -> Curriculum:
    if source == SOURCE_RANDOM_WALK:
        c = build_random_walk(level, goal_states_from_demos(demos), walk_stages, walk_seed)
        for i, rate in enumerate(c.discard_rates or [], start=1):
            logger.info("ランダムウォーク ステージ %d の破棄率: %.1f%%", i, 100 * rate)
    else:
        c = build_from_demos(demos)
    return combine_stages(c, CombinePlan.parse(combine))


# ============================================================================
# demo-gen
# ============================================================================

def cmd_demo_gen(args: argparse.Namespace) -> int:
    level = get_level(args.level)
    out = Path(args.out) if args.out else Path("demos") / f"{level.level_id}_s{args.seed}.jsonl"
    demos = gen_demos(level, args.n, args.seed)
    write_demos(out, demos)
    avg, longest = demo_stats(demos)
    print(ReportFormatter().format_demo_stats(level.level_id, len(demos), avg, longest, str(out)))
    return EXIT_OK


# ============================================================================
# build-curriculum
# ============================================================================

def cmd_build_curriculum(args: argparse.Namespace) -> int:
    demos = _load_demos(args.demos, n=args.n_demos)
    level = get_level(demos.level_id)
    c = _make_curriculum(level, demos, args.source, args.combine, args.walk_stages, args.walk_seed)
    write_curriculum(args.out, c)
    print(ReportFormatter().format_curriculum(c, args.out))
    return EXIT_OK


# ============================================================================
# train
# ============================================================================

# CLI フラグ名 → 設定キー
_TRAIN_FLAG_KEYS = {
    "level": "level",
    "mode": "mode",
    "combine": "combine",
    "n_demos": "n_demos",
    "walk_stages": "walk_stages",
    "walk_seed": "walk_seed",
    "seed": "seed",
    "out_dir": "out_dir",
    "deterministic": "deterministic",
    "run_id": "run_id",
    "demos": "demos",
    "curriculum": "curriculum",
    "scheduler": "scheduler.mode",
    "threshold": "scheduler.threshold",
    "tscl_variant": "scheduler.tscl_variant",
    "frames": "ppo.frame_budget",
    "workers": "ppo.workers",
    "lr": "ppo.lr",
    "hidden_size": "ppo.hidden_size",
}


def resolve_train_config(args: argparse.Namespace) -> RunConfig:
    """設定ファイル・CLI フラグ・--set から RunConfig を作る（CLI > ファイル > 既定値）"""
    file_values = read_config_file(args.config) if args.config else {}
    cli_values: Dict[str, Any] = {
        key: getattr(args, flag) for flag, key in _TRAIN_FLAG_KEYS.items() if getattr(args, flag) is not None
    }
    cli_values.update(parse_overrides(args.set or []))
    return build_run_config(file_values, cli_values)


def _curriculum_for(cfg: RunConfig, level: LevelSpec) -> Optional[Curriculum]:
    if cfg.mode == "ppo":
        return None
    if cfg.mode == "rcppo" and cfg.curriculum:
        c = read_curriculum(cfg.curriculum)
        if c.level_id != level.level_id:
            raise UsageError(f"カリキュラムのレベル ({c.level_id}) が指定のレベル ({level.level_id}) と一致しません")
        if CombinePlan.parse(cfg.combine).mode != c.combine_plan.mode:
            logger.warning("カリキュラムファイルを使うため combine=%s は無視します", cfg.combine)
        return c
    demos = _load_demos(cfg.demos, level.level_id, cfg.n_demos)
    source = SOURCE_RANDOM_WALK if cfg.mode == "rcppo_randomwalk" else SOURCE_DEMOS
    return _make_curriculum(level, demos, source, cfg.combine, cfg.walk_stages, cfg.walk_seed)


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_train_config(args)
    cfg.validate_for_launch()
    level = get_level(cfg.level)
    curriculum = _curriculum_for(cfg, level)

    run_dir = prepare_run_dir(cfg)
    if curriculum is not None:
        write_curriculum(run_dir / CURRICULUM_FILE, curriculum)
        logger.info("カリキュラム: %d ステージ / 開始状態 %d", curriculum.n_stages, curriculum.total_states)
    print(cfg.echo(), end="")

    trainer = Trainer(
        level,
        cfg.ppo,
        curriculum=curriculum,
        scheduler_cfg=cfg.scheduler,
        run_seed=cfg.seed,
        run_id=cfg.effective_run_id,
        deterministic=cfg.deterministic,
    )
    log = trainer.run(run_dir / LOG_FILE)
    save_params(run_dir / CHECKPOINT_FILE, trainer.params)

    summary = summarize_run(log, level.level_id, cfg.mode, ACCURACY_TARGETS)
    write_summary(run_dir, summary, log.metadata)
    print(ReportFormatter().format_summary(summary, str(run_dir)))
    return EXIT_OK


# ============================================================================
# eval
# ============================================================================

def cmd_eval(args: argparse.Namespace) -> int:
    level = get_level(args.level)
    if args.checkpoint:
        policy: Any = load_params(args.checkpoint)
        label = Path(args.checkpoint).name
    elif args.expert:
        policy, label = ExpertAgent(), "エキスパート"
    else:
        policy, label = RandomAgent(args.seed), "ランダム"
    report = eval_success_rate(policy, level, args.episodes, args.seed)
    print(ReportFormatter().format_eval(level.level_id, report, label))
    return EXIT_OK


# ============================================================================
# stats
# ============================================================================

def _emit_table(title: str, df: pd.DataFrame, out: Optional[str], notes: Optional[Dict[str, str]] = None) -> None:
    print(ReportFormatter().format_table(title, df, notes))
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(out, index=False, lineterminator="\n")
        print(f"保存先: {out}")


def cmd_stats_randwalk(args: argparse.Namespace) -> int:
    walk_len = args.walk_len if args.walk_len else None
    table = random_walk_table(parse_levels(args.levels), parse_int_list(args.k), args.trials, args.seed, walk_len)
    notes = {"試行数": str(args.trials), "行動数": str(walk_len) if walk_len else "k"}
    _emit_table("ランダムウォークのゴール到達率 (%)", table, args.out, notes)
    return EXIT_OK


def cmd_stats_demos(args: argparse.Namespace) -> int:
    if args.file:
        demos = _load_demos(args.file)
        avg, longest = demo_stats(demos)
        table = pd.DataFrame([{"level": demos.level_id, "n": len(demos), "avg": round(avg, 2), "max": longest}])
    else:
        table = demo_stats_table(parse_levels(args.levels), args.n, args.seed)
    _emit_table("デモ長の統計", table, args.out)
    return EXIT_OK


def cmd_stats_democount(args: argparse.Namespace) -> int:
    counts = parse_int_list(args.counts)
    if not counts:
        raise UsageError("--counts が空です")
    if args.file:
        demos = _load_demos(args.file)
    else:
        demos = gen_demos(get_level(args.level), max(counts), args.seed)
    table = demo_count_table(demos, counts)
    _emit_table(f"デモ数ごとのカリキュラム ({demos.level_id})", table, args.out)
    return EXIT_OK


def cmd_stats_plot(args: argparse.Namespace) -> int:
    logs = load_run_logs(args.runs)
    path = save_figure(create_eval_curve_figure(logs), args.out)
    print(f"評価曲線を保存しました: {path}")
    return EXIT_OK


def cmd_stats_summary(args: argparse.Namespace) -> int:
    summaries = [load_run_summary(run_dir) for run_dir in args.runs]
    _emit_table("実行ごとの集計", summarize_runs(summaries), None)
    _emit_table(f"精度 {args.target:g} までのフレーム数", comparison_table(summaries, args.target), args.out)
    return EXIT_OK


# ============================================================================
# パーサー
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcppo",
        description="エキスパートのデモから逆順カリキュラムを作り PPO で学習する",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG ログを表示")
    sub = parser.add_subparsers(dest="command", required=True)

    levels_help = f"レベル識別子（{', '.join(list_levels())}）"

    # demo-gen
    p = sub.add_parser("demo-gen", help="エキスパートのデモを生成")
    p.add_argument("--level", required=True, help=levels_help)
    p.add_argument("--n", type=int, default=DEFAULT_RUN["n_demos"], help="デモ数（デフォルト: 1000）")
    p.add_argument("--seed", type=int, default=DEFAULT_RUN["demo_seed"], help="生成シード")
    p.add_argument("--out", default=None, help="出力ファイル（JSON-lines）")
    p.set_defaults(func=cmd_demo_gen)

    # build-curriculum
    p = sub.add_parser("build-curriculum", help="デモからカリキュラムを構築")
    p.add_argument("--demos", required=True, help="デモファイル")
    p.add_argument("--combine", default=DEFAULT_RUN["combine"], help="ステージ結合: none | fixed:N | exp")
    p.add_argument("--source", choices=(SOURCE_DEMOS, SOURCE_RANDOM_WALK), default=SOURCE_DEMOS,
                   help="開始状態の作り方")
    p.add_argument("--walk-stages", type=int, default=DEFAULT_RUN["walk_stages"],
                   help="ランダムウォークのステージ数")
    p.add_argument("--walk-seed", type=int, default=DEFAULT_RUN["walk_seed"], help="ランダムウォークのシード")
    p.add_argument("--n-demos", type=int, default=None, help="ファイル先頭から使うデモ数")
    p.add_argument("--out", default="curriculum.json", help="出力ファイル")
    p.set_defaults(func=cmd_build_curriculum)

    # train（既定値は設定ファイル・DEFAULT_* 側で決まるので、ここでは None）
    p = sub.add_parser("train", help="PPO / RCPPO で学習")
    p.add_argument("--config", default=None, help="key=value 形式の設定ファイル")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="設定の上書き（例: ppo.lr=0.0005）")
    p.add_argument("--level", default=None, help=levels_help)
    p.add_argument("--mode", choices=RUN_MODES, default=None, help="学習モード")
    p.add_argument("--demos", default=None, help="デモファイル")
    p.add_argument("--curriculum", default=None, help="カリキュラムファイル")
    p.add_argument("--combine", default=None, help="ステージ結合: none | fixed:N | exp")
    p.add_argument("--n-demos", type=int, default=None, help="ファイル先頭から使うデモ数")
    p.add_argument("--walk-stages", type=int, default=None, help="ランダムウォークのステージ数")
    p.add_argument("--walk-seed", type=int, default=None, help="ランダムウォークのシード")
    p.add_argument("--scheduler", choices=SCHEDULER_MODES, default=None, help="スケジューラ")
    p.add_argument("--threshold", type=float, default=None, help="固定しきい値")
    p.add_argument("--tscl-variant", choices=TSCL_VARIANTS, default=None, help="TSCL の方式")
    p.add_argument("--frames", type=int, default=None, help="フレーム予算")
    p.add_argument("--workers", type=int, default=None, help="ワーカー数")
    p.add_argument("--lr", type=float, default=None, help="学習率")
    p.add_argument("--hidden-size", type=int, default=None, help="隠れ層の幅")
    p.add_argument("--seed", type=int, default=None, help="実行シード")
    p.add_argument("--out-dir", default=None, help="出力ディレクトリ")
    p.add_argument("--run-id", default=None, help="実行名")
    p.add_argument("--deterministic", action="store_true", default=None, help="ワーカー1つの決定的モード")
    p.set_defaults(func=cmd_train)

    # eval
    p = sub.add_parser("eval", help="方策を評価")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--checkpoint", default=None, help="チェックポイント (.npz)")
    who.add_argument("--expert", action="store_true", help="エキスパートを評価")
    who.add_argument("--random", action="store_true", help="一様ランダム方策を評価")
    p.add_argument("--level", required=True, help=levels_help)
    p.add_argument("--episodes", type=int, default=DEFAULT_HYPERPARAMS["eval_episodes"], help="エピソード数")
    p.add_argument("--seed", type=int, default=0, help="評価シード")
    p.set_defaults(func=cmd_eval)

    # stats
    p = sub.add_parser("stats", help="統計表と図")
    stats = p.add_subparsers(dest="stats_command", required=True)

    s = stats.add_parser("randwalk", help="ゴール k 手前からのランダムウォーク到達率")
    s.add_argument("--levels", default="goto_local,putnext_local", help="カンマ区切りのレベル")
    s.add_argument("--k", default="1..5", help="k の範囲（1..5）または一覧（1,2,3）")
    s.add_argument("--trials", type=int, default=RANDOM_WALK_TRIALS, help="k ごとの試行数")
    s.add_argument("--seed", type=int, default=0, help="乱数シード")
    s.add_argument(
        "--walk-len", type=int, default=None,
        help=f"ランダムに取る行動数（省略か0なら k、k によらず揃えるなら {RANDOM_WALK_LEN} など）",
    )
    s.add_argument("--out", default=None, help="CSV の出力先")
    s.set_defaults(func=cmd_stats_randwalk)

    s = stats.add_parser("demos", help="デモ長の統計")
    s.add_argument("--file", default=None, help="デモファイル（指定時はこれを集計）")
    s.add_argument("--levels", default="goto_local,putnext_local,unlock_pickup,goto", help="カンマ区切りのレベル")
    s.add_argument("--n", type=int, default=DEFAULT_RUN["n_demos"], help="レベルごとのデモ数")
    s.add_argument("--seed", type=int, default=DEFAULT_RUN["demo_seed"], help="生成シード")
    s.add_argument("--out", default=None, help="CSV の出力先")
    s.set_defaults(func=cmd_stats_demos)

    s = stats.add_parser("democount", help="デモ数ごとのカリキュラムの比較")
    s.add_argument("--level", default="putnext_local", help=levels_help)
    s.add_argument("--file", default=None, help="デモファイル（指定時はレベル・シードより優先）")
    s.add_argument("--counts", default="100,500,1000", help="カンマ区切りのデモ数")
    s.add_argument("--seed", type=int, default=DEFAULT_RUN["demo_seed"], help="生成シード")
    s.add_argument("--out", default=None, help="CSV の出力先")
    s.set_defaults(func=cmd_stats_democount)

    s = stats.add_parser("plot", help="評価成功率の推移を描画")
    s.add_argument("--runs", nargs="+", required=True, help="実行ディレクトリ")
    s.add_argument("--out", default="eval_curves.html", help="出力ファイル（.html / .svg / .png）")
    s.set_defaults(func=cmd_stats_plot)

    s = stats.add_parser("summary", help="実行結果の集計")
    s.add_argument("--runs", nargs="+", required=True, help="実行ディレクトリ")
    s.add_argument("--target", type=float, default=0.95, help="目標精度")
    s.add_argument("--out", default=None, help="CSV の出力先")
    s.set_defaults(func=cmd_stats_summary)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI のエントリポイント

    Returns:
        終了コード
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"エラー: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RCPPOError, OSError) as e:
        print(f"エラー: {e}", file=sys.stderr)
        return EXIT_RUNTIME
