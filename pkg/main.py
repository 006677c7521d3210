#!/usr/bin/env python3
"""
RCPPO CLI

エキスパートのデモから逆順カリキュラムを作り、PPO で格子世界のタスクを学習する

使用例:
    python main.py demo-gen --level goto_local --n 1000 --seed 1
    python main.py build-curriculum --demos demos/goto_local_s1.jsonl --combine exp
    python main.py train --mode rcppo --level goto_local --curriculum curriculum.json
    python main.py stats randwalk --levels goto_local,putnext_local --k 1..5
"""

import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
