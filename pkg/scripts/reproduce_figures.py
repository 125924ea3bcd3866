"""Snapshot runs behind the Airy, constant-g and variable-g figures.

Writes one directory per run under --out (CSV snapshots plus manifest.json).
``--quick`` divides the step counts by 8 and halves N for a fast smoke run.
"""

import argparse
import sys
import time

from dispersive_tbc.cli import main as cli

RUNS = [
    ("airy_g0", ["--experiment", "airy_g0"]),
    ("const_g_plus6", ["--experiment", "const_g", "--g-kind", "6"]),
    ("const_g_minus6", ["--experiment", "const_g", "--g-kind=-6", "--t-final", "1", "--n-steps", "4096",
                        "--snapshot-times", "0 0.5 1"]),
    ("variable_g", ["--experiment", "variable_g"]),
]


def quick_flags(args):
    steps = {"airy_g0": 2048, "const_g": 16384, "variable_g": 8192}
    exp = args[args.index("--experiment") + 1]
    m = int(args[args.index("--n-steps") + 1]) if "--n-steps" in args else steps[exp]
    return ["--n-steps", str(m // 8), "--n-modes", "128"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="output/figures")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--only", nargs="*", help="subset of run names")
    opts = ap.parse_args()
    status = 0
    for name, args in RUNS:
        if opts.only and name not in opts.only:
            continue
        extra = quick_flags(args) if opts.quick else []
        t0 = time.perf_counter()
        code = cli(["run", *args, *extra, "--output-dir", f"{opts.out}/{name}"])
        print(f"  [{name}] exit {code}, {time.perf_counter() - t0:.1f} s")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
