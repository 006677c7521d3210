"""
格子世界のテスト

遷移・報酬・観測・再生・レベル生成
"""

import numpy as np
import pytest

from src.errors import ReplayError, UsageError
from src.expert import solve
from src.gridworld import (
    Action,
    Color,
    Direction,
    DoorState,
    GridWorldEnv,
    Mission,
    ObjectType,
    Task,
    VIEW_SIZE,
    cached_level,
    get_level,
    list_levels,
    observe,
    replay,
    reset,
    step,
    success_predicate,
    transition,
)

from .helpers import (
    BLUE_BOX,
    GREEN_BALL,
    RED_BALL,
    YELLOW_DOOR,
    YELLOW_KEY,
    make_state,
    open_room,
)

GOTO_RED = Mission(Task.GOTO, RED_BALL)
PICKUP_BOX = Mission(Task.PICKUP, BLUE_BOX)


# ============================================================================
# 遷移
# ============================================================================

def test_forward_into_wall_keeps_position():
    """壁に向かって前進しても位置は変わらずステップだけ進む"""
    s = make_state(open_room(items={(1, 1): "^"}), PICKUP_BOX)
    s2, reward, done = step(s, Action.FORWARD)
    assert s2.agent.position == (1, 1)
    assert s2.steps_taken == 1
    assert reward == 0.0 and not done


def test_turns_follow_compass_order():
    s = make_state(open_room(items={(2, 2): "^"}), PICKUP_BOX)
    assert transition(s, Action.TURN_RIGHT).agent.direction == Direction.EAST
    assert transition(s, Action.TURN_LEFT).agent.direction == Direction.WEST
    assert Direction.WEST.right() == Direction.NORTH


def test_pickup_and_drop_move_object():
    s = make_state(open_room(items={(2, 2): ">", (3, 2): "b"}), Mission(Task.GOTO, RED_BALL))
    picked = transition(s, Action.PICKUP)
    assert picked.agent.carrying == BLUE_BOX
    assert picked.object_at((3, 2)) == ObjectType.EMPTY
    # 元の状態は変更されない
    assert s.object_at((3, 2)) == ObjectType.BOX

    # 手がふさがっていれば拾えない
    s_full = make_state(open_room(items={(2, 2): ">", (3, 2): "b"}), GOTO_RED, carrying=GREEN_BALL)
    assert transition(s_full, Action.PICKUP).agent.carrying == GREEN_BALL

    dropped = transition(transition(picked, Action.TURN_RIGHT), Action.DROP)
    assert dropped.agent.carrying is None
    assert dropped.object_at((2, 3)) == ObjectType.BOX


def test_drop_only_on_empty_floor():
    rows = ["#####", "#.O.#", "#.^.#", "#...#", "#####"]
    s = make_state(rows, GOTO_RED, carrying=GREEN_BALL)
    # 前はドア
    assert transition(s, Action.DROP).agent.carrying == GREEN_BALL


def test_toggle_door_states():
    rows = ["#####", "#.C.#", "#.^.#", "#####"]
    s = make_state(rows, PICKUP_BOX)
    opened = transition(s, Action.TOGGLE)
    assert opened.grid[1, 2, 2] == DoorState.OPEN
    closed = transition(opened, Action.TOGGLE)
    assert closed.grid[1, 2, 2] == DoorState.CLOSED


def test_locked_door_needs_matching_key():
    rows = ["#####", "#.L.#", "#.^.#", "#####"]
    without_key = make_state(rows, PICKUP_BOX)
    assert transition(without_key, Action.TOGGLE).grid[1, 2, 2] == DoorState.LOCKED
    wrong_key = make_state(rows, PICKUP_BOX, carrying=(ObjectType.KEY, Color.RED))
    assert transition(wrong_key, Action.TOGGLE).grid[1, 2, 2] == DoorState.LOCKED
    with_key = make_state(rows, PICKUP_BOX, carrying=YELLOW_KEY)
    assert transition(with_key, Action.TOGGLE).grid[1, 2, 2] == DoorState.OPEN


def test_forward_through_open_door_only():
    closed = make_state(["#####", "#.C.#", "#.^.#", "#####"], PICKUP_BOX)
    assert transition(closed, Action.FORWARD).agent.position == (2, 2)
    opened = make_state(["#####", "#.O.#", "#.^.#", "#####"], PICKUP_BOX)
    assert transition(opened, Action.FORWARD).agent.position == (2, 1)


def test_done_action_is_noop():
    s = make_state(open_room(items={(2, 2): "^"}), PICKUP_BOX)
    s2 = transition(s, Action.DONE)
    assert s2.agent == s.agent
    assert np.array_equal(s2.grid, s.grid)
    assert s2.history == (int(Action.DONE),)


# ============================================================================
# 報酬と終了
# ============================================================================

def test_success_reward_decays_with_steps():
    """成功時の報酬は 1 - 0.9 * (t / max_steps)"""
    s = make_state(open_room(items={(1, 2): ">", (3, 2): "R"}), GOTO_RED, max_steps=100)
    s2, reward, done = step(s, Action.FORWARD)
    assert done
    assert reward == pytest.approx(1.0 - 0.9 * 1 / 100)


def test_step_budget_ends_episode_without_reward():
    s = make_state(open_room(items={(2, 2): "^"}), PICKUP_BOX, max_steps=2)
    s, reward, done = step(s, Action.TURN_LEFT)
    assert not done
    s, reward, done = step(s, Action.TURN_LEFT)
    assert done and reward == 0.0


def test_step_on_terminal_state_raises():
    s = make_state(open_room(items={(1, 2): ">", (3, 2): "R"}), GOTO_RED)
    s2, _, done = step(s, Action.FORWARD)
    assert done
    with pytest.raises(UsageError):
        step(s2, Action.TURN_LEFT)


def test_success_predicates_per_task():
    goto = make_state(open_room(items={(2, 2): ">", (3, 2): "R"}), GOTO_RED)
    assert success_predicate(goto)

    carrying = make_state(open_room(items={(2, 2): ">"}), PICKUP_BOX, carrying=BLUE_BOX)
    assert success_predicate(carrying)

    door_open = make_state(["#####", "#.O.#", "#.^.#", "#####"], Mission(Task.OPEN, YELLOW_DOOR))
    assert success_predicate(door_open)
    door_closed = make_state(["#####", "#.C.#", "#.^.#", "#####"], Mission(Task.OPEN, YELLOW_DOOR))
    assert not success_predicate(door_closed)

    putnext = Mission(Task.PUTNEXT, RED_BALL, GREEN_BALL)
    adjacent = make_state(open_room(items={(1, 1): "^", (3, 3): "R", (3, 4): "g"}), putnext)
    diagonal = make_state(open_room(items={(1, 1): "^", (3, 3): "R", (4, 4): "g"}), putnext)
    assert success_predicate(adjacent)
    assert not success_predicate(diagonal)


# ============================================================================
# 観測
# ============================================================================

def test_observation_is_egocentric():
    s = make_state(open_room(items={(2, 2): ">", (3, 2): "R", (2, 3): "b"}), GOTO_RED, carrying=None)
    obs = observe(s)
    assert obs.view.shape == (VIEW_SIZE, VIEW_SIZE, 3)
    # 前方1マス
    assert tuple(obs.view[VIEW_SIZE - 2, VIEW_SIZE // 2]) == (ObjectType.BALL, Color.RED, DoorState.NONE)
    # 東向きの右手は南
    assert tuple(obs.view[VIEW_SIZE - 1, VIEW_SIZE // 2 + 1]) == (ObjectType.BOX, Color.BLUE, DoorState.NONE)
    # グリッド外は壁
    assert obs.view[0, 0, 0] == ObjectType.WALL
    assert np.array_equal(obs.mission_code, GOTO_RED.encode())


def test_observation_encodes_carried_object_in_agent_cell():
    s = make_state(open_room(items={(2, 2): "^"}), GOTO_RED, carrying=YELLOW_KEY)
    obs = observe(s)
    assert tuple(obs.view[VIEW_SIZE - 1, VIEW_SIZE // 2]) == (ObjectType.KEY, Color.YELLOW, DoorState.NONE)


def test_observe_is_pure():
    s = make_state(open_room(items={(2, 2): "^"}), GOTO_RED)
    assert observe(s) == observe(s)


# ============================================================================
# ミッション
# ============================================================================

def test_mission_text_and_validation():
    assert Mission(Task.PICKUP, YELLOW_KEY).describe() == "pick up the yellow key"
    assert Mission(Task.PUTNEXT, RED_BALL, GREEN_BALL).describe() == "put the red ball next to the green ball"
    with pytest.raises(UsageError):
        Mission(Task.GOTO, RED_BALL, GREEN_BALL)
    with pytest.raises(UsageError):
        Mission(Task.PICKUP, YELLOW_DOOR)


def test_mission_dict_form():
    m = Mission(Task.PUTNEXT, RED_BALL, BLUE_BOX)
    data = m.to_dict()
    assert data["task"] == "putnext"
    assert data["target"] == ["ball", "red"]
    assert Mission.from_dict(data) == m


# ============================================================================
# レベル
# ============================================================================

def test_unknown_level_is_usage_error():
    with pytest.raises(UsageError):
        get_level("no_such_level")


@pytest.mark.parametrize("level_id", list_levels())
def test_reset_geometry_and_determinism(level_id):
    level = cached_level(level_id)
    s = reset(level, 12345)
    assert s.grid.shape == (level.height, level.width, 3)
    assert s.max_steps == 8 * level.room_size * max(level.rooms)
    assert s.steps_taken == 0 and s.history == ()
    assert not success_predicate(s)
    assert reset(level, 12345) == s


def test_room_geometry_shares_walls():
    assert (get_level("goto_local").width, get_level("goto_local").height) == (8, 8)
    assert (get_level("unlock_pickup").width, get_level("unlock_pickup").height) == (11, 6)
    assert get_level("goto").width == 22


def test_different_seeds_give_different_layouts(goto_local):
    states = [reset(goto_local, seed) for seed in range(5)]
    assert len({s.grid.tobytes() + bytes(s.agent.position) for s in states}) > 1


def test_unlock_pickup_has_one_locked_door():
    s = reset(cached_level("unlock_pickup"), 3)
    doors = np.argwhere(s.grid[..., 0] == ObjectType.DOOR)
    assert len(doors) == 1
    y, x = doors[0]
    assert s.grid[y, x, 2] == DoorState.LOCKED
    assert s.mission.task == Task.UNLOCK_PICKUP


def test_unlock_pickup_always_has_matching_key():
    """どのシードでも施錠ドアはちょうど1つで、同じ色の鍵が床にある"""
    level = cached_level("unlock_pickup")
    for seed in range(1000):
        s = reset(level, seed)
        doors = np.argwhere(s.grid[..., 0] == ObjectType.DOOR)
        assert len(doors) == 1, seed
        y, x = doors[0]
        assert s.grid[y, x, 2] == DoorState.LOCKED, seed
        door_color = Color(int(s.grid[y, x, 1]))
        assert s.find((ObjectType.KEY, door_color)), seed


@pytest.mark.parametrize("level_id", ["goto_local", "pickup_local", "putnext_local", "unlock_pickup"])
def test_random_actions_conserve_objects(level_id):
    """ランダムな行動列の間、持ち運べるオブジェクトの数は変わらない"""
    level = cached_level(level_id)
    rng = np.random.default_rng(0)
    for seed in range(50):
        state = reset(level, seed)
        census = state.object_census()
        for action in rng.integers(len(Action), size=60):
            state = transition(state, int(action))
            assert state.object_census() == census, (seed, state.history)


# ============================================================================
# 再生
# ============================================================================

def test_replay_reaches_demo_goal(goto_local):
    demo = solve(reset(goto_local, 99))
    final = replay(goto_local, 99, demo.actions)
    assert success_predicate(final)
    assert final.history == demo.actions


def test_replay_past_terminal_raises(goto_local):
    demo = solve(reset(goto_local, 99))
    with pytest.raises(ReplayError):
        replay(goto_local, 99, demo.actions + (int(Action.DONE),), demo_index=4)


def test_replay_non_strict_continues_after_goal(goto_local):
    demo = solve(reset(goto_local, 99))
    s = replay(goto_local, 99, demo.actions + (int(Action.DONE),), strict=False)
    assert s.steps_taken == len(demo) + 1


def test_env_wrapper_requires_reset(goto_local):
    env = GridWorldEnv(goto_local)
    with pytest.raises(UsageError):
        env.step(Action.FORWARD)
    obs = env.reset(5)
    assert obs.view.shape == (VIEW_SIZE, VIEW_SIZE, 3)
