#!/usr/bin/env python3
"""Convergence traces (per-iteration L2 deltas) across formats and presets.

Writes convergence.csv (per request) and convergence_mean.csv (averaged over
requests) per preset. Norms below 1e-7 are not emitted, which is where the
fixed-point runs flatten out and the float64 run keeps decaying geometrically.
"""

import argparse
import sys
from pathlib import Path

from qppr import cli, datagen

DEFAULT_PRESETS = ["er_100k", "er_200k", "ws_100k", "ws_200k", "hk_100k", "hk_200k"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", default=",".join(DEFAULT_PRESETS),
                    help=f"comma list from: {', '.join(sorted(datagen.PRESETS))}")
    ap.add_argument("--formats", default="f64,25,23,21,19")
    ap.add_argument("--iters", type=int, default=30)
    ap.add_argument("--requests", type=int, default=8)
    ap.add_argument("--kappa", type=int, default=8)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="results/convergence")
    args = ap.parse_args()

    root = Path(args.out)
    for name in [p.strip() for p in args.presets.split(",") if p.strip()]:
        print(f"== {name} ==", flush=True)
        rc = cli.main([
            "convergence",
            "--graph", name,
            "--formats", args.formats,
            "--iters", str(args.iters),
            "--requests", str(args.requests),
            "--kappa", str(args.kappa),
            "--seed", str(args.seed),
            "--out", str(root / name),
        ])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
