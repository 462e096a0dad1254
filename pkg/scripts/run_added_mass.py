#!/usr/bin/env python3
"""Added-mass comparison: explicit Dirichlet-Neumann vs Robin-Robin on the
same matched-density problem; writes dn_compare.csv.

Usage: python scripts/run_added_mass.py [--config configs/dn_compare.cfg]
"""

import argparse
import os
import sys

from fsisplit.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=os.path.join(ROOT, "configs", "dn_compare.cfg"))
    ap.add_argument("--out", default=os.path.join(ROOT, "results", "dn_compare"))
    args = ap.parse_args()
    sys.exit(main(["dn-compare", "--config", args.config, "--out", args.out]))
