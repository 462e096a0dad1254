#!/usr/bin/env python3
"""Energy-stability sweep: random initial data, writes stability.csv.

Usage: python scripts/run_stability.py [--config configs/stability.cfg]
"""

import argparse
import os
import sys

from fsisplit.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=os.path.join(ROOT, "configs", "stability.cfg"))
    ap.add_argument("--out", default=os.path.join(ROOT, "results", "stability"))
    args = ap.parse_args()
    sys.exit(main(["stability", "--config", args.config, "--out", args.out]))
