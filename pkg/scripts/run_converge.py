#!/usr/bin/env python3
"""Convergence sweep: flat vs pulled-back metrics and the fibration maps."""

import sys

from theta_amoeba.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--k", "4", "9", "16", "--out", "out/converge"]
    raise SystemExit(main(["converge", *args]))
