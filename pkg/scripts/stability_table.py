"""Squared Fourier amplification factor of one splitting step.

Prints max over integer k <= kmax of the factor and of (factor - 1)/tau
for a few g and tau, next to the uniform bound g^2/2 on the latter.
"""

import argparse

import numpy as np

from dispersive_tbc.reference import amplification_factor


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=64)
    ap.add_argument("--g", type=float, nargs="*", default=[0.5, 1.0, 2.0, 6.0])
    opts = ap.parse_args()
    k = np.arange(opts.kmax + 1)
    print(f"{'g':>6} {'tau':>8} {'max factor':>12} {'max (f-1)/tau':>14} {'g^2/2':>8}")
    for g in opts.g:
        for tau in np.logspace(-3, -1, 5):
            f = amplification_factor(g, tau, k)
            print(f"{g:6.2f} {tau:8.1e} {f.max():12.6f} {((f - 1) / tau).max():14.4e} {g * g / 2:8.2f}")


if __name__ == "__main__":
    main()
