#!/usr/bin/env python3
"""Run the bundled catalog configs end-to-end into ./demo_out."""
import sys

from qpspec.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--out", "demo_out"]
    sys.exit(main(["demo", *args]))
