#!/usr/bin/env python3
"""Export moment-map image samples of the embedded torus into CSV."""

import sys

from theta_amoeba.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--k", "4", "9", "--out", "out/amoeba"]
    raise SystemExit(main(["amoeba", *args]))
