#!/usr/bin/env python3
"""Time-splitting convergence study against the monolithic reference.

Writes converge.csv (errors per dt level) and consistency.csv (per-window
averaging-consistency norms); prints the fitted energy-norm rate.

Usage: python scripts/run_convergence.py [--config configs/converge.cfg]
"""

import argparse
import os
import sys

from fsisplit.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=os.path.join(ROOT, "configs", "converge.cfg"))
    ap.add_argument("--out", default=os.path.join(ROOT, "results", "converge"))
    args = ap.parse_args()
    sys.exit(main(["converge", "--config", args.config, "--out", args.out]))
