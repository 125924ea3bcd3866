"""Spatial and temporal convergence sweeps, printed as tables and saved as CSV.

Defaults follow the full study (m = 2^13 for the spatial sweep,
m = 2^7..2^10 with N = 64 for the temporal one); pass --steps to shorten
the spatial sweep.
"""

import argparse
import csv
import sys
from pathlib import Path

from dispersive_tbc.cli import main as cli


def table(path, cols):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    print("  " + "  ".join(f"{c:>12}" for c in cols))
    for r in rows:
        cells = [r[c] if c in ("g", "N", "m") else f"{float(r[c]):.3e}" for c in cols]
        print("  " + "  ".join(f"{c:>12}" for c in cells))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="output/convergence")
    ap.add_argument("--steps", type=int, default=8192, help="time steps for the spatial sweep")
    ap.add_argument("--g", default="0 6 -6 cosine")
    ap.add_argument("--workers", type=int, default=1)
    opts = ap.parse_args()
    out = Path(opts.out)
    common = ["--sweep-g", opts.g, "--workers", str(opts.workers)]

    code = cli(["converge-space", *common, "--n-steps", str(opts.steps), "--output-dir", str(out / "space")])
    if code == 0:
        table(out / "space" / "converge_space.csv", ["g", "N", "rel_l2", "pointwise_l2", "final_rel"])
    code2 = cli(["converge-time", *common, "--output-dir", str(out / "time")])
    if code2 == 0:
        table(out / "time" / "converge_time.csv", ["g", "m", "tau", "rel_error"])
    return code or code2


if __name__ == "__main__":
    sys.exit(main())
