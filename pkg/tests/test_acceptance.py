"""
受け入れテスト

カリキュラムの健全性・ランダムウォーク到達率・デモ長・学習の成否などを確認する。
数時間かかる学習は slow マーカーつき（pytest -m slow で実行）。
"""

import numpy as np
import pytest

from src.constants.defaults import RANDOM_WALK_LEN
from src.curriculum import CombinePlan, build_from_demos, combine_stages
from src.expert import gen_demos
from src.gridworld import cached_level, list_levels, observe, reset, step
from src.metrics import demo_stats, frames_to_accuracy, random_walk_goal_rates
from src.neuralpolicy import (
    PARAM_NAMES,
    LossSpec,
    Minibatch,
    encode_views,
    forward_batch,
    init_params,
    log_softmax,
    loss_and_grad,
    stack_observations,
)
from src.scheduler import CurriculumScheduler, SchedulerConfig, stage_threshold
from src.trainer import HyperParams, Trainer, gae

from .helpers import direct_gae

# ============================================================================
# カリキュラムの健全性
# ============================================================================

@pytest.mark.parametrize("level_id", list_levels())
def test_every_start_state_reaches_goal(level_id):
    """デモから作った開始状態は、残りの行動列を再生すると報酬 > 0 で終わる"""
    demos = gen_demos(cached_level(level_id), 100, generation_seed=0)
    c = build_from_demos(demos)
    assert c.n_stages == max(len(d) for d in demos.demos) - 1
    for k in range(1, c.n_stages + 1):
        for start in c.stage(k):
            state = c.materialize(start).with_fresh_budget()
            reward, done = 0.0, False
            for action in c.remaining_actions(start):
                state, reward, done = step(state, action)
                if done:
                    break
            assert done and reward > 0, (level_id, start)


# ============================================================================
# ランダムウォーク到達率
# ============================================================================

TRIALS = 10000


def _standard_error(rate: float, trials: int) -> float:
    return float(np.sqrt(max(rate * (1.0 - rate), 1e-12) / trials))


@pytest.fixture(scope="module")
def walk_rates():
    ks = [1, 2, 3, 4, 5]
    return {
        level_id: random_walk_goal_rates(cached_level(level_id), ks, TRIALS, seed=0, walk_len=RANDOM_WALK_LEN)
        for level_id in ("goto_local", "putnext_local")
    }


@pytest.mark.parametrize("level_id", ["goto_local", "putnext_local"])
def test_walk_rate_does_not_increase_with_distance(walk_rates, level_id):
    rates = walk_rates[level_id]
    for k in range(1, 5):
        slack = 2 * (_standard_error(rates[k], TRIALS) + _standard_error(rates[k + 1], TRIALS))
        assert rates[k + 1] <= rates[k] + slack, (k, rates)


def test_walk_rate_bands(walk_rates):
    assert 0.15 <= walk_rates["goto_local"][1] <= 0.50
    assert walk_rates["putnext_local"][4] < 0.05


# ============================================================================
# デモ長
# ============================================================================

def test_demo_length_ordering():
    means = {
        level_id: demo_stats(gen_demos(cached_level(level_id), 500, generation_seed=0))[0]
        for level_id in ("goto_local", "putnext_local", "unlock_pickup", "goto")
    }
    assert means["goto_local"] < means["putnext_local"] < means["unlock_pickup"] < means["goto"], means


# ============================================================================
# 勾配と GAE
# ============================================================================

def _random_minibatch(params, rng: np.random.Generator, n: int = 6) -> Minibatch:
    levels = list_levels()
    states = [reset(cached_level(levels[int(rng.integers(len(levels)))]), int(rng.integers(1000))) for _ in range(n)]
    views, missions = stack_observations([observe(s) for s in states])
    actions = rng.integers(7, size=n)
    logits, _ = forward_batch(params, views, missions)
    return Minibatch(
        views=views,
        missions=missions,
        actions=actions,
        old_log_probs=log_softmax(logits)[np.arange(n), actions],
        advantages=rng.normal(size=n),
        returns=rng.uniform(0.0, 1.0, size=n),
    )


@pytest.mark.parametrize("net_seed", range(5))
def test_gradients_on_random_networks(net_seed):
    rng = np.random.default_rng(100 + net_seed)
    params = init_params(hidden_size=6, seed=net_seed)
    for name in PARAM_NAMES:
        params[name][...] += rng.normal(scale=0.1, size=params[name].shape)
    mb = _random_minibatch(params, rng)
    spec = LossSpec(clip_eps=0.2, value_coef=0.5, entropy_coef=0.01)
    _, grads = loss_and_grad(params, mb, spec)

    active = np.nonzero(encode_views(mb.views).sum(axis=0))[0]
    checks = [(name, idx) for name in PARAM_NAMES if name not in ("obs_w", "mission_w")
              for idx in np.ndindex(params[name].shape)]
    checks += [("obs_w", (int(row), col)) for row in rng.choice(active, size=4, replace=False)
               for col in range(params.hidden_size)]

    eps = 1e-6
    worst = 0.0
    for name, idx in checks:
        plus, minus = params.copy(), params.copy()
        plus[name][idx] += eps
        minus[name][idx] -= eps
        numeric = (loss_and_grad(plus, mb, spec)[0].total - loss_and_grad(minus, mb, spec)[0].total) / (2 * eps)
        analytic = grads[name][idx]
        worst = max(worst, abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-5))
    assert worst < 1e-4


def test_gae_matches_direct_sum_on_many_sequences():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 65))
        rewards = rng.normal(size=n)
        values = rng.normal(size=n)
        dones = rng.random(n) < 0.15
        bootstrap = float(rng.normal())
        gamma, lam = 0.99, float(rng.uniform(0.0, 1.0))
        adv, _ = gae(rewards, values, dones, bootstrap, gamma, lam)
        assert np.max(np.abs(adv - direct_gae(rewards, values, dones, bootstrap, gamma, lam))) < 1e-10


# ============================================================================
# 決定性
# ============================================================================

def test_deterministic_training_is_byte_identical(tmp_path, goto_local, goto_local_demos):
    c = build_from_demos(goto_local_demos)
    h = HyperParams(frame_budget=50_000, eval_episodes=16)
    paths = []
    for name in ("first", "second"):
        path = tmp_path / f"{name}.csv"
        Trainer(goto_local, h, curriculum=c, run_seed=5, run_id="det", deterministic=True).run(path)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


# ============================================================================
# スケジューラ
# ============================================================================

def test_scheduler_rules():
    fixed = SchedulerConfig(window=10, min_episodes=10)
    scheduler = CurriculumScheduler(fixed, 3, np.random.default_rng(0))
    for success in [False] + [True] * 9:
        scheduler.record(1, success)
    assert scheduler.current_stage == 2

    graduated = SchedulerConfig(mode="graduated")
    assert stage_threshold(graduated, 1, 5) == pytest.approx(0.70)
    assert stage_threshold(graduated, 3, 5) == pytest.approx(0.845)
    assert stage_threshold(graduated, 5, 5) == pytest.approx(0.99)


@pytest.mark.parametrize(
    "text,expected",
    [("fixed:5", [5, 5, 2]), ("fixed:10", [10, 2]), ("exp", [1, 2, 4, 5])],
)
def test_combine_partitions(goto_local_demos, text, expected):
    plan = CombinePlan.parse(text)
    assert plan.group_sizes(12) == expected
    c = build_from_demos(goto_local_demos)
    combined = combine_stages(c, plan)
    assert combined.total_states == c.total_states


# ============================================================================
# 学習（数時間）
# ============================================================================

def _train(level_id, frames, seed, curriculum=None, scheduler_cfg=None):
    h = HyperParams(frame_budget=frames)
    return Trainer(
        cached_level(level_id), h, curriculum=curriculum,
        scheduler_cfg=scheduler_cfg, run_seed=seed, run_id=f"{level_id}_s{seed}",
    ).run()


@pytest.mark.slow
def test_unlock_pickup_needs_curriculum():
    level = cached_level("unlock_pickup")
    c = build_from_demos(gen_demos(level, 500, generation_seed=1))
    baseline_best = []
    curriculum_hits = 0
    for seed in range(3):
        base = _train("unlock_pickup", 3_000_000, seed)
        baseline_best.append(max((r.eval_success or 0.0) for r in base.records))
        rc = _train("unlock_pickup", 3_000_000, seed, curriculum=c, scheduler_cfg=SchedulerConfig())
        curriculum_hits += frames_to_accuracy(rc, 0.95) is not None
    assert max(baseline_best) < 0.20
    assert curriculum_hits >= 2


@pytest.mark.slow
def test_baseline_solves_goto_redball():
    hits = sum(frames_to_accuracy(_train("goto_redball", 2_000_000, seed), 0.95) is not None for seed in range(3))
    assert hits >= 2


@pytest.mark.slow
def test_demo_count_has_little_effect():
    level = cached_level("putnext_local")
    demos = gen_demos(level, 1000, generation_seed=1)
    frames = []
    for n in (100, 1000):
        log = _train("putnext_local", 3_000_000, 0, curriculum=build_from_demos(demos.head(n)))
        reached = frames_to_accuracy(log, 0.9)
        assert reached is not None, n
        frames.append(reached)
    assert max(frames) / min(frames) < 2.0
