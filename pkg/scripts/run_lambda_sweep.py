#!/usr/bin/env python3
"""Robin-weight sweep: convergence study for lambda in {0.1, 1, 10};
writes lambda_sweep.csv.

Usage: python scripts/run_lambda_sweep.py [--config configs/lambda_sweep.cfg]
"""

import argparse
import os
import sys

from fsisplit.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=os.path.join(ROOT, "configs", "lambda_sweep.cfg"))
    ap.add_argument("--out", default=os.path.join(ROOT, "results", "lambda_sweep"))
    args = ap.parse_args()
    sys.exit(main(["lambda-sweep", "--config", args.config, "--out", args.out]))
