#!/usr/bin/env python3
"""Sweep the three-layer slab Green tensor against the transfer-matrix
oracle over a (q, omega) grid and report the worst relative deviation per
polarization block.
"""

import argparse
import sys
import time

import numpy as np

from nlmedia import slab, tm_oracle
from nlmedia.response import local_dielectric_model


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nq", type=int, default=10)
    parser.add_argument("--nw", type=int, default=10)
    parser.add_argument("--thickness", type=float, default=1.3)
    parser.add_argument("--tol", type=float, default=1e-8)
    args = parser.parse_args()

    eps = (2 + 0.3j, 1.5 + 0.2j, 3 + 0.4j)
    models = [local_dielectric_model(e) for e in eps]
    d = args.thickness
    zp, zf = 0.4 * d, 0.7 * d
    qs = np.linspace(0.2, 2.2, args.nq)
    ws = np.linspace(0.6, 1.4, args.nw)

    t0 = time.perf_counter()
    worst_s = worst_p = 0.0
    for q in qs:
        for w in ws:
            got = slab.slab_green(models, d, q, w, zp, zf)
            ref = tm_oracle.local_slab_green(*eps, d, q, w, zp, zf)
            scale = np.abs(ref).max()
            worst_s = max(worst_s, abs(got[0, 0] - ref[0, 0]) / scale)
            worst_p = max(worst_p,
                          np.abs(got[1:, 1:] - ref[1:, 1:]).max() / scale)
    elapsed = time.perf_counter() - t0

    print(f"{args.nq}x{args.nw} (q, omega) grid, d = {d}, "
          f"eps = {eps}, heights ({zp:.3f}, {zf:.3f})")
    print(f"worst s-block deviation: {worst_s:.3e}")
    print(f"worst p-block deviation: {worst_p:.3e}")
    print(f"elapsed: {elapsed:.1f} s")
    ok = max(worst_s, worst_p) <= args.tol
    print("PASS" if ok else f"FAIL (tolerance {args.tol:g})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
