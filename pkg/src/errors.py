"""
例外クラス

RCPPO実験基盤で発生するエラーの階層
"""

from typing import Optional


class RCPPOError(Exception):
    """全エラーの基底クラス"""


class UsageError(RCPPOError, ValueError):
    """引数・設定・呼び出し順序の誤り（CLIでは終了コード2）"""


class ConstructionError(RCPPOError):
    """レベル生成の再試行回数を使い切った"""


class ReplayError(RCPPOError):
    """デモの再生中、行動列が尽きる前に終端状態に到達した"""

    def __init__(self, message: str, demo_index: Optional[int] = None):
        if demo_index is not None:
            message = f"デモ #{demo_index}: {message}"
        super().__init__(message)
        self.demo_index = demo_index


class PlanningError(RCPPOError):
    """ゴールセルに到達できない"""


class UnsolvableInstanceError(PlanningError):
    """エキスパートがレベルインスタンスを解けなかった"""


class EmptyStageError(RCPPOError):
    """カリキュラムのステージが空"""


class NumericError(RCPPOError):
    """非有限値（NaN/inf）を検出した"""

    def __init__(self, message: str, layer: Optional[str] = None):
        if layer is not None:
            message = f"[{layer}] {message}"
        super().__init__(message)
        self.layer = layer


class CorruptFileError(RCPPOError):
    """ファイル内容が壊れている"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path is not None:
            location = str(path)
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line
