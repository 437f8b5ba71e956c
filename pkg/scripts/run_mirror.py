#!/usr/bin/env python3
"""Mirror two-torus example: triangle coefficients and intersection counts."""

import sys

from theta_amoeba.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--k", "2", "4", "8", "--out", "out/mirror"]
    raise SystemExit(main(["mirror", *args]))
