"""
評価指標のテスト
"""

import pytest

from src.errors import UsageError
from src.expert import gen_demos
from src.gridworld import cached_level
from src.metrics import (
    NOT_REACHED,
    RandomAgent,
    RunSummary,
    comparison_table,
    demo_count_table,
    demo_stats,
    demo_stats_table,
    eval_success_rate,
    frames_to_accuracy,
    random_walk_goal_rate,
    random_walk_goal_rates,
    random_walk_table,
    summarize_run,
    summarize_runs,
)
from src.trainer import IterationRecord, TrainingLog


def _log(points, run_id="r"):
    """[(frames, eval_success, curriculum_done), ...] から TrainingLog を作る"""
    log = TrainingLog(run_id)
    for i, (frames, rate, done) in enumerate(points, start=1):
        log.append(IterationRecord(
            run_id=run_id, iteration=i, frames=frames, stage=0 if done else 1,
            train_success=None, eval_success=rate,
            policy_loss=0.0, value_loss=0.0, entropy=1.0, curriculum_done=done,
        ))
    return log


# ============================================================================
# 到達フレーム数
# ============================================================================

def test_frames_to_accuracy_counts_only_after_curriculum():
    log = _log([(100, 0.99, False), (200, 0.5, True), (300, None, True), (400, 0.96, True)])
    assert frames_to_accuracy(log, 0.95) == 400
    assert frames_to_accuracy(log, 0.4) == 200
    assert frames_to_accuracy(log, 0.99) is None


def test_summarize_run():
    log = _log([(100, 0.2, True), (200, 0.91, True)], run_id="x")
    summary = summarize_run(log, "goto_local", "ppo", targets=(0.9, 0.95))
    assert summary.frames_to_accuracy == {0.9: 200, 0.95: None}
    assert summary.final_eval == pytest.approx(0.91)
    assert summary.total_frames == 200
    data = summary.to_dict()
    assert data["frames_to_0.9"] == 200
    assert data["frames_to_0.95"] is None


def test_summarize_runs_averages_reached_only():
    runs = [
        RunSummary("a", "goto_local", "rcppo", {0.9: 100}),
        RunSummary("b", "goto_local", "rcppo", {0.9: 300}),
        RunSummary("c", "goto_local", "rcppo", {0.9: None}),
        RunSummary("d", "goto_local", "ppo", {0.9: None}),
    ]
    df = summarize_runs(runs, targets=[0.9]).set_index("mode")
    assert df.loc["rcppo", "frames_to_0.9"] == pytest.approx(200.0)
    assert df.loc["rcppo", "reached_0.9"] == 2
    assert df.loc["rcppo", "runs"] == 3
    assert df.loc["ppo", "frames_to_0.9"] == NOT_REACHED


def test_comparison_table_is_level_by_mode():
    runs = [
        RunSummary("a", "goto_local", "rcppo", {0.95: 100}),
        RunSummary("b", "goto_local", "ppo", {0.95: None}),
        RunSummary("c", "unlock_pickup", "rcppo", {0.95: 500}),
    ]
    table = comparison_table(runs, 0.95).set_index("level")
    assert table.loc["goto_local", "rcppo"] == pytest.approx(100.0)
    assert table.loc["goto_local", "ppo"] == NOT_REACHED
    assert table.loc["unlock_pickup", "ppo"] == NOT_REACHED
    assert comparison_table([], 0.95).empty


# ============================================================================
# 評価
# ============================================================================

def test_eval_is_reproducible(goto_local):
    a = eval_success_rate(RandomAgent(0), goto_local, n_episodes=8, eval_seed=5)
    b = eval_success_rate(RandomAgent(0), goto_local, n_episodes=8, eval_seed=5)
    assert a == b
    assert 0.0 <= a.success_rate <= 1.0
    assert a.episodes == 8


def test_eval_with_params(goto_local, tiny_params):
    report = eval_success_rate(tiny_params, goto_local, n_episodes=4, eval_seed=0, frames=123)
    assert report.frames == 123
    assert 1 <= report.mean_length <= goto_local.max_steps


def test_eval_requires_episodes(goto_local):
    with pytest.raises(UsageError):
        eval_success_rate(RandomAgent(0), goto_local, n_episodes=0, eval_seed=0)


# ============================================================================
# ランダムウォーク
# ============================================================================

def test_random_walk_rate_near_goal(goto_local):
    rate = random_walk_goal_rate(goto_local, 1, trials=300, seed=0)
    # ゴール1手前から1手: 正しい1手（前進か回転）を引く確率は 1/7 前後
    assert 0.05 <= rate <= 0.5


def test_random_walk_rates_shared_and_deterministic(goto_local):
    rates = random_walk_goal_rates(goto_local, [1, 3], trials=100, seed=2)
    again = random_walk_goal_rates(goto_local, [1, 3], trials=100, seed=2)
    assert rates == again
    assert rates[1] == random_walk_goal_rate(goto_local, 1, trials=100, seed=2)


def test_longer_walk_budget_helps(goto_local):
    short = random_walk_goal_rate(goto_local, 2, trials=300, seed=4)
    long = random_walk_goal_rate(goto_local, 2, trials=300, seed=4, walk_len=20)
    assert long >= short


def test_random_walk_rejects_bad_arguments(goto_local):
    with pytest.raises(UsageError):
        random_walk_goal_rate(goto_local, 0, trials=10, seed=0)
    with pytest.raises(UsageError):
        random_walk_goal_rate(goto_local, 1, trials=0, seed=0)
    with pytest.raises(UsageError):
        random_walk_goal_rate(goto_local, 1, trials=10, seed=0, walk_len=0)


def test_random_walk_k_beyond_step_budget_is_usage_error(goto_local):
    with pytest.raises(UsageError, match="goto_local"):
        random_walk_goal_rate(goto_local, goto_local.max_steps + 1, trials=1, seed=0)
    # 複数の k のうち1つでも上限を超えれば計算前に弾く
    with pytest.raises(UsageError):
        random_walk_goal_rates(goto_local, [1, goto_local.max_steps + 1], trials=1, seed=0)


def test_random_walk_gives_up_when_no_demo_is_long_enough(goto_local):
    """上限内でもデモがその長さに届かなければ、引き直しの上限で止まる"""
    k = goto_local.max_steps - 4
    with pytest.raises(UsageError, match=f"goto_local で {k} 手以上"):
        random_walk_goal_rate(goto_local, k, trials=1, seed=0)


def test_random_walk_table_shape():
    table = random_walk_table(["goto_local", "putnext_local"], [1, 2], trials=20, seed=0)
    assert list(table.columns) == ["level", "1", "2"]
    assert list(table["level"]) == ["goto_local", "putnext_local"]
    assert ((table[["1", "2"]] >= 0) & (table[["1", "2"]] <= 100)).all().all()


# ============================================================================
# デモ統計
# ============================================================================

def test_goto_local_average_demo_length():
    avg, longest = demo_stats(gen_demos(cached_level("goto_local"), 1000, generation_seed=1))
    assert 4.0 <= avg <= 12.0
    assert longest <= cached_level("goto_local").max_steps


def test_demo_stats(goto_local_demos):
    avg, longest = demo_stats(goto_local_demos)
    lengths = [len(d) for d in goto_local_demos.demos]
    assert avg == pytest.approx(sum(lengths) / len(lengths))
    assert longest == max(lengths)


def test_demo_stats_table_has_reference_columns():
    table = demo_stats_table(["goto_local", "unlock_pickup"], n=5, generation_seed=0)
    row = table.set_index("level").loc["goto_local"]
    assert row["stages"] == row["max"] - 1
    assert row["ref_avg"] == pytest.approx(6.4)


def test_demo_count_table(goto_local_demos):
    table = demo_count_table(goto_local_demos, [5, 20])
    assert list(table["n_demos"]) == [5, 20]
    assert table["start_states"].iloc[0] <= table["start_states"].iloc[1]
    with pytest.raises(UsageError):
        demo_count_table(goto_local_demos, [21])


def test_unlock_demos_longer_than_goto():
    goto = demo_stats(gen_demos(cached_level("goto_local"), 30, generation_seed=0))[0]
    unlock = demo_stats(gen_demos(cached_level("unlock_pickup"), 30, generation_seed=0))[0]
    assert unlock > goto
