#!/usr/bin/env python3
"""Emit the predicted spectral spiral figure for a run config.

Usage: emit_spiral_figure.py CONFIG.json [OUT.svg]
"""
import sys
from pathlib import Path

import numpy as np

from qpspec import svg as svgmod
from qpspec.cli import RunConfig
from qpspec.symbols import ClusterPlan, cluster_set


def main(argv):
    if not argv:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    cfg = RunConfig.load(Path(argv[0]))
    out = Path(argv[1]) if len(argv) > 1 else Path(cfg.name + "_spiral.svg")
    s1, s2 = cfg.symbols()
    plan = ClusterPlan(seed=cfg.seed)
    c1 = cluster_set(s1, "infinity", plan)
    c2 = cluster_set(s2, "infinity", plan)
    min_im = min(float(np.min(c1.points.imag)), float(np.min(c2.points.imag)))
    t = np.linspace(0.0, 8.0 / min_im, cfg.t_samples)
    paths = [
        np.exp(1j * (a * t[:, None] + b * t[None, :])).reshape(-1)
        for a in c1.points[:8]
        for b in c2.points[:8]
    ]
    out.write_text(svgmod.spiral_figure(paths))
    print(f"wrote {out} ({len(paths)} cluster pairs)")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
