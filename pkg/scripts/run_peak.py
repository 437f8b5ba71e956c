#!/usr/bin/env python3
"""Peak-section diagnostics and near-diagonal kernel comparison by level."""

import sys

from theta_amoeba.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--k", "2", "4", "8", "16", "--out", "out/peak"]
    raise SystemExit(main(["peak", *args]))
