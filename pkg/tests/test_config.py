"""
実行設定のテスト
"""

from pathlib import Path

import pytest

from src.config import (
    RunConfig,
    build_run_config,
    parse_config_text,
    parse_overrides,
    read_config_file,
)
from src.errors import UsageError
from src.scheduler import SchedulerConfig
from src.trainer import HyperParams


def test_defaults():
    cfg = build_run_config()
    assert cfg == RunConfig()
    assert cfg.mode == "ppo"
    assert cfg.scheduler == SchedulerConfig()
    assert cfg.ppo == HyperParams()


def test_cli_overrides_file_overrides_defaults():
    file_values = {"level": "goto_local", "mode": "rcppo", "ppo.lr": "0.0005", "seed": "3"}
    cli_values = {"level": "pickup_local", "seed": None, "scheduler.mode": "graduated"}
    cfg = build_run_config(file_values, cli_values)
    assert cfg.level == "pickup_local"
    assert cfg.mode == "rcppo"
    assert cfg.seed == 3
    assert cfg.ppo.lr == pytest.approx(0.0005)
    assert cfg.scheduler.mode == "graduated"


def test_value_coercion():
    cfg = build_run_config({
        "ppo.frame_budget": "100_000",
        "deterministic": "yes",
        "scheduler.threshold": "0.8",
        "ppo.lr_decay": "on",
        "run_id": "none",
    })
    assert cfg.ppo.frame_budget == 100000
    assert cfg.deterministic is True
    assert cfg.scheduler.threshold == pytest.approx(0.8)
    assert cfg.ppo.lr_decay is True
    assert cfg.run_id is None


def test_typed_cli_values():
    cfg = build_run_config(cli_values={"deterministic": True, "ppo.workers": 2, "ppo.lr": 1e-4})
    assert cfg.deterministic is True
    assert cfg.ppo.workers == 2
    assert cfg.ppo.lr == pytest.approx(1e-4)


@pytest.mark.parametrize(
    "values",
    [
        {"no_such_key": "1"},
        {"ppo.no_such_key": "1"},
        {"scheduler.bogus": "1"},
        {"seed": "abc"},
        {"deterministic": "maybe"},
        {"mode": "bogus"},
        {"level": "nowhere"},
        {"combine": "fixed:0"},
        {"n_demos": "0"},
        {"ppo.gamma": "2.0"},
    ],
)
def test_invalid_values_are_usage_errors(values):
    with pytest.raises(UsageError):
        build_run_config(values)


def test_parse_config_text_comments_and_errors():
    text = "# コメント\nlevel = goto_local  # 行末コメント\n\nmode=rcppo\n"
    assert parse_config_text(text) == {"level": "goto_local", "mode": "rcppo"}
    with pytest.raises(UsageError) as excinfo:
        parse_config_text("level = goto_local\nthis line is wrong\n", source="x.txt")
    assert "x.txt:2" in str(excinfo.value)


def test_parse_overrides():
    assert parse_overrides(["ppo.lr=0.01", "seed = 4"]) == {"ppo.lr": "0.01", "seed": "4"}
    with pytest.raises(UsageError):
        parse_overrides(["ppo.lr"])


def test_echo_round_trip(tmp_path):
    """設定エコーを読み直すと同じ設定になる"""
    cfg = build_run_config({
        "level": "unlock_pickup",
        "mode": "rcppo",
        "combine": "fixed:5",
        "run_id": "exp1",
        "demos": "demos/unlock.jsonl",
        "scheduler.mode": "tscl",
        "scheduler.tscl_variant": "window",
        "ppo.lr": "0.00025",
        "ppo.workers": "4",
    })
    path = tmp_path / "config.txt"
    path.write_text(cfg.echo(), encoding="utf-8")
    assert build_run_config(read_config_file(path)) == cfg
    assert "ppo.lr = 0.00025" in cfg.echo()
    assert "curriculum" not in parse_config_text(cfg.echo())


def test_missing_config_file(tmp_path):
    with pytest.raises(UsageError):
        read_config_file(tmp_path / "nope.txt")


def test_run_dir_and_run_id():
    cfg = RunConfig(level="goto_local", mode="rcppo", seed=2, out_dir="out")
    assert cfg.effective_run_id == "goto_local_rcppo_s2"
    assert cfg.run_dir == Path("out") / "goto_local_rcppo_s2"
    assert RunConfig(run_id="mine").effective_run_id == "mine"


def test_validate_for_launch(tmp_path):
    with pytest.raises(UsageError):
        RunConfig(mode="rcppo").validate_for_launch()
    with pytest.raises(UsageError):
        RunConfig(mode="rcppo_randomwalk", curriculum="c.json").validate_for_launch()
    with pytest.raises(UsageError):
        RunConfig(mode="rcppo", demos=str(tmp_path / "missing.jsonl")).validate_for_launch()

    demos = tmp_path / "demos.jsonl"
    demos.write_text("{}\n", encoding="utf-8")
    RunConfig(mode="rcppo", demos=str(demos)).validate_for_launch()
    RunConfig(mode="ppo").validate_for_launch()
