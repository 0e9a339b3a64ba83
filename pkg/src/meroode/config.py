"""Tolerance and sampling knobs shared across the package.

Every numerical routine takes a :class:`Tolerances` instance explicitly (or
falls back to :data:`DEFAULT`); nothing reads global mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # root clustering: backward error (relative to coefficient scale) allowed
    # when merging nearby roots into one multiple root
    root_cluster: float = 1e-8
    # e1 + e2 + e3 = 0 check before building invariants
    centered: float = 1e-9
    # |g2^3 - 27 g3^2| below this (relative) means a degenerate lattice
    degenerate: float = 1e-10
    # AtPole when the reduced argument is closer than this times |shortest period|
    pole_proximity: float = 1e-6
    # generic "is this complex number zero" test, relative to the natural scale
    zero: float = 1e-9
    # Laurent series truncation used by the Weierstrass evaluator
    wp_series_order: int = 24
    # halve the argument until |z| < halving_threshold * |shortest period|
    wp_halving_threshold: float = 0.25

    def with_overrides(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT = Tolerances()
