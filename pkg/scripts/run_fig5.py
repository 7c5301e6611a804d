#!/usr/bin/env python3
"""Reproduce the max-connected-devices sweep: M_max versus r_B at
r_M = 0.25 bits/s/Hz for both slicing modes over L in {1, 2, 4, 8, 16}.

The non-orthogonal search rebuilds channel statistics per candidate device
count, so the full sweep is expensive (hours at 1e5 trials); use --trials
and --r-b-points to scale it down. Output is the `max-devices` CSV.
"""

import argparse
import sys
import tempfile

from slicesim.cli import main as slicesim_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fig5_max_devices.csv")
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--r-b-points", type=int, default=41)
    parser.add_argument("--L", type=int, nargs="*", default=None)
    args = parser.parse_args()

    overrides = [f"r_b_points = {args.r_b_points}"]
    if args.L:
        overrides.append(f"L = {','.join(str(v) for v in args.L)}")
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write("\n".join(overrides) + "\n")
        config = fh.name

    code = slicesim_main(
        ["max-devices", "--preset", "fig5", "--config", config,
         "--trials", str(args.trials), "--seed", str(args.seed),
         "--workers", str(args.workers), "--out", args.out]
    )
    if code == 0:
        print(f"wrote {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
