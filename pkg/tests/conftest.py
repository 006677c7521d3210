"""テスト共通のフィクスチャ"""

import sys
from pathlib import Path

import pytest

_project_root = Path(__file__).parent.parent.resolve()
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

from src.expert import gen_demos
from src.gridworld import cached_level
from src.neuralpolicy import init_params


@pytest.fixture(scope="session")
def goto_local():
    return cached_level("goto_local")


@pytest.fixture(scope="session")
def goto_local_demos(goto_local):
    """GoToLocal のデモ 20 件"""
    return gen_demos(goto_local, 20, generation_seed=1)


@pytest.fixture(scope="session")
def putnext_demos():
    return gen_demos(cached_level("putnext_local"), 10, generation_seed=3)


@pytest.fixture
def tiny_params():
    """隠れ層 8 の小さなネットワーク"""
    return init_params(hidden_size=8, seed=0)


@pytest.fixture
def run_root(tmp_path) -> Path:
    root = tmp_path / "runs"
    root.mkdir()
    return root
