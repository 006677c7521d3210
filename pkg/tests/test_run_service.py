"""
RunService のテスト
"""

import pytest

from core.run_service import RunService, clear_service_cache, get_run_service
from src.config import RunConfig
from src.curriculum import build_from_demos
from src.metrics import summarize_run
from src.rundir import LOG_FILE, prepare_run_dir, write_summary
from src.trainer import HyperParams, Trainer

TINY = dict(horizon=16, workers=1, minibatch_size=16, epochs=1, hidden_size=8, eval_interval=1, eval_episodes=2)


def _make_run(run_root, goto_local, mode, curriculum=None, seed=0):
    cfg = RunConfig(level="goto_local", mode=mode, seed=seed, out_dir=str(run_root), ppo=HyperParams(frame_budget=32, **TINY))
    run_dir = prepare_run_dir(cfg)
    log = Trainer(goto_local, cfg.ppo, curriculum=curriculum, run_seed=seed, run_id=cfg.effective_run_id).run(run_dir / LOG_FILE)
    write_summary(run_dir, summarize_run(log, "goto_local", mode), log.metadata)
    return cfg.effective_run_id


@pytest.fixture
def populated_root(run_root, goto_local, goto_local_demos):
    _make_run(run_root, goto_local, "ppo")
    _make_run(run_root, goto_local, "rcppo", curriculum=build_from_demos(goto_local_demos))
    return run_root


def test_list_and_load_runs(populated_root):
    service = RunService(str(populated_root))
    assert service.list_runs() == ["goto_local_ppo_s0", "goto_local_rcppo_s0"]
    results = service.load_runs()
    assert len(results) == 2
    assert service.last_errors == {}
    by_mode = {r.mode: r for r in results}
    assert by_mode["ppo"].scheduler == "-"
    assert by_mode["ppo"].final_stage == 0
    assert by_mode["rcppo"].scheduler == "fixed_threshold"
    assert by_mode["rcppo"].summary.total_frames == 32


def test_overview_and_aggregate_tables(populated_root):
    service = RunService(str(populated_root))
    results = service.load_runs()
    overview = service.overview_table(results)
    assert {"run_id", "level", "mode", "scheduler", "frames", "final_eval", "stage", "curriculum_done"} <= set(overview.columns)
    assert "frames_to_0.95" in overview.columns
    aggregate = service.aggregate_table(results)
    assert set(aggregate["mode"]) == {"ppo", "rcppo"}
    comparison = service.comparison(results, 0.95)
    assert list(comparison["level"]) == ["goto_local"]


def test_figures_have_one_trace_per_run(populated_root):
    service = RunService(str(populated_root))
    results = service.load_runs()
    assert len(service.create_eval_figure(results).data) == 2
    assert len(service.create_stage_progress_figure(results).data) == 1


def test_broken_run_is_recorded(populated_root):
    broken = populated_root / "goto_local_ppo_s0" / LOG_FILE
    broken.write_text("garbage\n1,2\n", encoding="utf-8")
    service = RunService(str(populated_root))
    results = service.load_runs()
    assert [r.run_id for r in results] == ["goto_local_rcppo_s0"]
    assert "goto_local_ppo_s0" in service.last_errors


def test_empty_or_missing_root(tmp_path):
    assert RunService(str(tmp_path / "none")).list_runs() == []
    assert RunService(str(tmp_path)).load_runs() == []


def test_service_cache(run_root):
    clear_service_cache()
    a = get_run_service(str(run_root))
    assert get_run_service(str(run_root)) is a
    assert get_run_service(str(run_root), use_cache=False) is not a
    clear_service_cache(str(run_root))
    assert get_run_service(str(run_root)) is not a
    clear_service_cache()
