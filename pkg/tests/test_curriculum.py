"""
カリキュラム構築のテスト
"""

import json
from collections import Counter

import numpy as np
import pytest

from src.curriculum import (
    COMBINE_NONE,
    SOURCE_RANDOM_WALK,
    CombinePlan,
    build_from_demos,
    build_random_walk,
    combine_stages,
    draw_start,
    goal_states_from_demos,
    read_curriculum,
    sample_start,
    write_curriculum,
)
from src.errors import CorruptFileError, EmptyStageError, UsageError
from src.expert import gen_demos
from src.gridworld import Mission, Task, cached_level, reset, step, success_predicate

from .helpers import YELLOW_DOOR, make_state


def _play_out(state, actions):
    """行動列を step で適用し、(最終状態, 終了した手数) を返す"""
    for i, action in enumerate(actions, start=1):
        state, reward, done = step(state, action)
        if done:
            return state, i, reward
    return state, None, 0.0


# ============================================================================
# デモからの構築
# ============================================================================

def test_stage_count_follows_longest_demo(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    lengths = [len(d) for d in goto_local_demos.demos]
    assert c.n_stages == max(lengths) - 1
    assert c.total_states == sum(n - 1 for n in lengths)
    for k in range(1, c.n_stages + 1):
        assert len(c.stage(k)) == sum(1 for n in lengths if n > k)


def test_stage_k_is_k_steps_from_goal(goto_local_demos):
    """ステージ k の開始状態は残りの行動列でちょうど k 手で成功する"""
    c = build_from_demos(goto_local_demos)
    for k in (1, 2, c.n_stages):
        for start in c.stage(k):
            assert start.distance == k
            state = c.materialize(start).with_fresh_budget()
            assert not success_predicate(state)
            remaining = c.remaining_actions(start)
            assert len(remaining) == k
            final, steps, reward = _play_out(state, remaining)
            assert steps == k
            assert success_predicate(final) and reward > 0


def test_prefix_len_plus_distance_is_demo_length(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    for stage in c.stages:
        for start in stage:
            demo = goto_local_demos.demos[start.source_demo]
            assert start.prefix_len + start.distance == len(demo)
            assert start.seed == demo.seed


def test_putnext_curriculum_replays(putnext_demos):
    c = build_from_demos(putnext_demos)
    start = c.stage(c.n_stages)[0]
    final, steps, _ = _play_out(c.materialize(start).with_fresh_budget(), c.remaining_actions(start))
    assert steps == c.n_stages


def test_stage_index_out_of_range(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    with pytest.raises(UsageError):
        c.stage(0)
    with pytest.raises(UsageError):
        c.stage(c.n_stages + 1)


# ============================================================================
# ステージ結合
# ============================================================================

@pytest.mark.parametrize(
    "text,n_stages,expected",
    [
        ("exp", 22, [1, 2, 4, 8, 7]),
        ("fixed:10", 22, [10, 10, 2]),
        ("fixed:5", 5, [5]),
        ("none", 3, [1, 1, 1]),
        ("exponential", 1, [1]),
    ],
)
def test_combine_group_sizes(text, n_stages, expected):
    sizes = CombinePlan.parse(text).group_sizes(n_stages)
    assert sizes == expected
    assert sum(sizes) == n_stages


@pytest.mark.parametrize("text", ["fixed:0", "fixed:x", "half", ""])
def test_combine_plan_rejects_bad_text(text):
    with pytest.raises(UsageError):
        CombinePlan.parse(text)


def test_combine_preserves_order(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    combined = combine_stages(c, CombinePlan.parse("exp"))
    assert combined.n_stages == len(CombinePlan.parse("exp").group_sizes(c.n_stages))
    flat = [s for stage in c.stages for s in stage]
    flat_combined = [s for stage in combined.stages for s in stage]
    assert flat == flat_combined
    assert combined.stage(1) == c.stage(1)
    assert combined.combine_plan.label() == "exp"


def test_combine_none_is_identity(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    assert combine_stages(c, CombinePlan(COMBINE_NONE)) is c


# ============================================================================
# 開始状態のサンプリング
# ============================================================================

def test_draw_start_gives_fresh_budget(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    rng = np.random.default_rng(0)
    for _ in range(10):
        start, state = draw_start(c, 2, rng)
        assert start in c.stage(2)
        assert state.steps_taken == 0
        assert len(state.history) == start.prefix_len
        assert state.max_steps == cached_level("goto_local").max_steps


def test_draw_start_is_deterministic(goto_local_demos):
    c = build_from_demos(goto_local_demos)
    a = [draw_start(c, 1, np.random.default_rng(5))[0] for _ in range(3)]
    b = [draw_start(c, 1, np.random.default_rng(5))[0] for _ in range(3)]
    assert a == b


def test_sample_start_is_uniform_over_stage(goto_local_demos):
    """10状態のステージから10000回引くと、各状態がおよそ1000回ずつ出る"""
    c = build_from_demos(goto_local_demos.head(10))
    assert len(c.stage(1)) == 10
    rng = np.random.default_rng(0)
    counts = Counter(sample_start(c, 1, rng).seed for _ in range(10000))
    assert len(counts) == 10
    assert all(800 <= n <= 1200 for n in counts.values())


# ============================================================================
# ランダムウォーク
# ============================================================================

def test_random_walk_curriculum(goto_local, goto_local_demos):
    goals = goal_states_from_demos(goto_local_demos)
    c = build_random_walk(goto_local, goals, n_stages=3, walk_seed=0)
    assert c.source == SOURCE_RANDOM_WALK
    assert c.n_stages == 3
    assert len(c.discard_rates) == 3
    assert all(0.0 <= r <= 1.0 for r in c.discard_rates)
    for i, stage in enumerate(c.stages, start=1):
        assert stage
        for start in stage:
            assert start.distance == i
            state = c.materialize(start)
            assert not success_predicate(state)
            assert len(state.history) == start.prefix_len
    # 生き残ったウォークは前のステージにも残っている
    assert len(c.stage(1)) >= len(c.stage(2)) >= len(c.stage(3))
    with pytest.raises(UsageError):
        c.remaining_actions(c.stage(1)[0])


def test_random_walk_is_deterministic(goto_local, goto_local_demos):
    goals = goal_states_from_demos(goto_local_demos)
    a = build_random_walk(goto_local, goals, n_stages=4, walk_seed=9)
    b = build_random_walk(goto_local, goals, n_stages=4, walk_seed=9)
    assert a == b


@pytest.fixture(scope="module")
def many_walks(goto_local):
    """GoToLocal のゴール状態 200 個から 50 本ずつ、計 10000 本のウォーク"""
    goals = goal_states_from_demos(gen_demos(goto_local, 200, generation_seed=5))
    return build_random_walk(goto_local, goals * 50, n_stages=5, walk_seed=0)


def test_goto_first_stage_discards_about_four_sevenths(many_walks):
    # ターゲットを向いたままになる 前進・置く・トグル・完了 の4行動
    assert many_walks.discard_rates[0] == pytest.approx(4 / 7, abs=0.03)


def test_discard_rate_does_not_rise_with_walk_length(many_walks):
    """ステップごとの破棄率は、モンテカルロ誤差の範囲でウォーク長に対して増えない"""
    rates = many_walks.discard_rates
    alive = [10000] + [len(many_walks.stage(i)) for i in range(1, many_walks.n_stages)]
    errors = [np.sqrt(r * (1.0 - r) / n) for r, n in zip(rates, alive)]
    for i in range(len(rates) - 1):
        slack = 3.0 * np.hypot(errors[i], errors[i + 1])
        assert rates[i + 1] <= rates[i] + slack
    assert rates[0] > max(rates[1:])


def test_random_walk_empty_stage_raises():
    """ドアから離れた開いたドアの状態は1手では成功から抜け出せない"""
    rows = ["#######", "#.^...#", "#.....#", "#.....#", "###O###"]
    goal = make_state(rows, Mission(Task.OPEN, YELLOW_DOOR), level_id="open", max_steps=200)
    with pytest.raises(EmptyStageError):
        build_random_walk(cached_level("open"), [goal], n_stages=2, walk_seed=0)


def test_random_walk_rejects_non_goal_states(goto_local):
    with pytest.raises(UsageError):
        build_random_walk(goto_local, [reset(goto_local, 0)], n_stages=2, walk_seed=0)
    with pytest.raises(UsageError):
        build_random_walk(goto_local, [], n_stages=2, walk_seed=0)


# ============================================================================
# ファイル入出力
# ============================================================================

def test_curriculum_file_round_trip(tmp_path, goto_local_demos):
    c = combine_stages(build_from_demos(goto_local_demos), CombinePlan.parse("fixed:3"))
    path = tmp_path / "curriculum.json"
    write_curriculum(path, c)
    loaded = read_curriculum(path)
    assert loaded == c
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["n_stages"] == c.n_stages
    assert data["combine_plan"] == "fixed:3"


def test_corrupt_curriculum_json(tmp_path):
    path = tmp_path / "curriculum.json"
    path.write_text('{"level": "goto_local",\n "stages": [', encoding="utf-8")
    with pytest.raises(CorruptFileError) as excinfo:
        read_curriculum(path)
    assert excinfo.value.path == str(path)


def test_curriculum_with_bad_demo_index(tmp_path, goto_local_demos):
    c = build_from_demos(goto_local_demos.head(2))
    path = tmp_path / "curriculum.json"
    write_curriculum(path, c)
    data = json.loads(path.read_text(encoding="utf-8"))
    data["stages"][0][0]["demo_index"] = 99
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(CorruptFileError):
        read_curriculum(path)


def test_curriculum_stage_count_mismatch(tmp_path, goto_local_demos):
    c = build_from_demos(goto_local_demos.head(2))
    path = tmp_path / "curriculum.json"
    write_curriculum(path, c)
    data = json.loads(path.read_text(encoding="utf-8"))
    data["n_stages"] += 1
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(CorruptFileError):
        read_curriculum(path)
