#!/usr/bin/env python3
"""Residual table for every multiplicity pattern of the binomial equation.

For each pattern, random roots and leading coefficient are drawn, the closed
form is built by ``bb_solve`` and the residual of (u')^2 - a_k prod(u - e_j)
is measured at non-pole points. Prints a fixed-width table.
"""

import argparse
import time

import numpy as np

from meroode.briot_bouquet import PATTERNS, bb_classify_roots, bb_from_roots, bb_residual, bb_solve
from meroode.numerics import PolyCoeffs
from meroode.reductions import BBEquation
from meroode.solutions import expr as ex


def draw(mults, rng):
    while True:
        roots = rng.normal(size=len(mults)) + 1j * rng.normal(size=len(mults))
        gaps = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
        if not gaps or min(gaps) > 0.3:
            break
    a_k = complex(*rng.normal(size=2))
    if abs(a_k) < 0.3:
        a_k += 0.5
    if not mults:
        return BBEquation.from_poly(PolyCoeffs([a_k]))
    return bb_from_roots(a_k, [(complex(r), m) for r, m in zip(roots, mults)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--draws", type=int, default=10)
    ap.add_argument("--points", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'pattern':<10} {'k':>2} {'mults':<14} {'max residual':>13} {'seconds':>8}")
    for (k, mults), name in sorted(PATTERNS.items(), key=lambda kv: (kv[0][0], kv[1])):
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(args.draws):
            eq = draw(mults, rng)
            assert bb_classify_roots(eq).pattern == name
            u = bb_solve(eq)
            b = {"z0": complex(*rng.uniform(-0.5, 0.5, size=2))}
            z = 1.2 * np.sqrt(rng.uniform(size=8 * args.points)) * np.exp(2j * np.pi * rng.uniform(size=8 * args.points))
            with np.errstate(all="ignore"):
                val, der = ex.jet_arrays(u, z, 1, b)
            z = z[np.isfinite(val) & np.isfinite(der) & (np.abs(val) < 1e4)][: args.points]
            worst = max(worst, float(np.max(bb_residual(eq, u, z, b))))
        print(f"{name:<10} {k:>2} {str(mults):<14} {worst:>13.2e} {time.perf_counter() - t0:>8.2f}")


if __name__ == "__main__":
    main()
