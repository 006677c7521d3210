"""
コアロジック層

UI非依存のサービスを提供する
"""

from .run_service import RunService, RunResult, get_run_service, clear_service_cache

__all__ = [
    "RunService",
    "RunResult",
    "get_run_service",
    "clear_service_cache",
]
