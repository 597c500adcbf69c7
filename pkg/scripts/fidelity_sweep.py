#!/usr/bin/env python3
"""Rank-fidelity sweep over the evaluation presets.

For each preset this runs the full format ladder (float64, float32 and the
four fixed-point widths) for 10 iterations against a 100-iteration float64
golden run, 100 personalization requests in batches of 8, and leaves
metrics.csv / metrics_aggregate.csv / provenance.json per preset under the
output root. Expect roughly ten minutes per 2M-arc preset on one core.
"""

import argparse
import sys
from pathlib import Path

from qppr import cli, datagen

DEFAULT_PRESETS = ["er_200k", "ws_200k", "hk_200k"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", default=",".join(DEFAULT_PRESETS),
                    help=f"comma list from: {', '.join(sorted(datagen.PRESETS))}")
    ap.add_argument("--formats", default="f64,f32,25,23,21,19")
    ap.add_argument("--iters", type=int, default=10)
    ap.add_argument("--requests", type=int, default=100)
    ap.add_argument("--kappa", type=int, default=8)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/fidelity")
    args = ap.parse_args()

    root = Path(args.out)
    for name in [p.strip() for p in args.presets.split(",") if p.strip()]:
        print(f"== {name} ==", flush=True)
        rc = cli.main([
            "run",
            "--graph", name,
            "--formats", args.formats,
            "--iters", str(args.iters),
            "--requests", str(args.requests),
            "--kappa", str(args.kappa),
            "--seed", str(args.seed),
            "--threads", str(args.threads),
            "--out", str(root / name),
        ])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
