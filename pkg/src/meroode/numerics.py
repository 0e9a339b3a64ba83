"""Low-degree polynomial roots, Weierstrass invariants and period lattices."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import elliprf

from .config import DEFAULT, Tolerances
from .errors import DegenerateLattice, RootsNotCentered, UnsupportedDegree


def as_complex(x) -> complex:
    """Coerce a number (or ``[re, im]`` pair) to a finite Python complex."""
    if isinstance(x, (list, tuple)):
        re, im = x
        x = complex(float(re), float(im))
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite complex value {z!r}")
    return z


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial with ascending coefficients; trailing zeros are trimmed."""

    coefficients: tuple

    def __init__(self, coefficients: Sequence):
        coeffs = [as_complex(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        # the zero polynomial reports degree 0
        return max(len(self.coefficients) - 1, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coeff(self, n: int) -> complex:
        return self.coefficients[n] if 0 <= n < len(self.coefficients) else 0j

    @property
    def leading(self) -> complex:
        return self.coefficients[-1] if self.coefficients else 0j

    def scale(self) -> float:
        return max((abs(c) for c in self.coefficients), default=0.0)

    def __call__(self, x):
        acc = 0j if np.isscalar(x) else np.zeros_like(np.asarray(x, dtype=complex))
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> "PolyCoeffs":
        return PolyCoeffs([n * c for n, c in enumerate(self.coefficients)][1:])

    def antiderivative(self) -> "PolyCoeffs":
        """Primitive vanishing at 0."""
        return PolyCoeffs([0j] + [c / (n + 1) for n, c in enumerate(self.coefficients)])

    def __add__(self, other: "PolyCoeffs") -> "PolyCoeffs":
        n = max(len(self.coefficients), len(other.coefficients))
        return PolyCoeffs([self.coeff(i) + other.coeff(i) for i in range(n)])

    def __mul__(self, other):
        if isinstance(other, PolyCoeffs):
            if self.is_zero or other.is_zero:
                return PolyCoeffs([])
            out = np.convolve(np.array(self.coefficients), np.array(other.coefficients))
            return PolyCoeffs(out)
        return PolyCoeffs([c * other for c in self.coefficients])

    __rmul__ = __mul__

    def __neg__(self) -> "PolyCoeffs":
        return self * -1

    def __sub__(self, other: "PolyCoeffs") -> "PolyCoeffs":
        return self + (-other)

    @classmethod
    def from_roots(cls, roots: Sequence[tuple[complex, int]], leading: complex) -> "PolyCoeffs":
        p = cls([leading])
        for r, m in roots:
            for _ in range(m):
                p = p * cls([-r, 1])
        return p


def _poly_deriv_coeffs(coeffs: np.ndarray, m: int) -> np.ndarray:
    """m-th derivative of a descending-order coefficient array."""
    out = coeffs
    for _ in range(m):
        out = np.polyder(out)
    return out


def _newton_polish(desc: np.ndarray, x: complex, steps: int) -> complex:
    d = np.polyder(desc)
    for _ in range(steps):
        fx = np.polyval(desc, x)
        dfx = np.polyval(d, x)
        if dfx == 0:
            break
        step = fx / dfx
        if not np.isfinite(step):
            break
        x = x - step
    return complex(x)


def _backward_error(p: PolyCoeffs, clusters: list[tuple[complex, int]]) -> float:
    rebuilt = PolyCoeffs.from_roots(clusters, p.leading)
    n = p.degree + 1
    return max(abs(rebuilt.coeff(i) - p.coeff(i)) for i in range(n))


def roots_low_degree(
    p: PolyCoeffs, tol: float | None = None, *, tols: Tolerances = DEFAULT
) -> list[tuple[complex, int]]:
    """Roots of a polynomial of degree 1..4 with multiplicities.

    Candidate roots come from the companion matrix (``numpy.roots``) and are
    polished by two Newton steps. Nearby roots are then merged greedily,
    closest pair first, and the longest prefix of that merge sequence whose
    rebuilt polynomial stays within ``tol * scale(p)`` of the input
    coefficients is kept. Each merged root is refined as a root of the
    (m-1)-th derivative.
    """
    if tol is None:
        tol = tols.root_cluster
    k = p.degree
    if p.is_zero or k < 1 or k > 4:
        raise UnsupportedDegree(f"roots_low_degree needs degree 1..4, got {k}")
    desc = np.array(p.coefficients[::-1], dtype=complex)
    raw = np.roots(desc)
    raw = [_newton_polish(desc, complex(r), 2) for r in raw]
    clusters: list[tuple[complex, int]] = [(r, 1) for r in raw]
    scale = p.scale()

    # Greedy closest-pair merging. A partial merge can look worse than no merge
    # (e.g. two double roots, only one pair merged yet), so every prefix of the
    # merge sequence is scored and the longest acceptable one is kept.
    accepted = list(clusters)
    work = list(clusters)
    while len(work) > 1:
        best = None
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                d = abs(work[i][0] - work[j][0])
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        (ri, mi), (rj, mj) = work[i], work[j]
        m = mi + mj
        centre = (ri * mi + rj * mj) / m
        dm = _poly_deriv_coeffs(desc, m - 1)
        if len(dm) > 1:
            centre = _newton_polish(dm, centre, 3)
        work = [c for n, c in enumerate(work) if n not in (i, j)] + [(centre, m)]
        if _backward_error(p, work) <= tol * scale:
            accepted = list(work)
    clusters = accepted

    clusters.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return clusters


@dataclass(frozen=True)
class EllipticInvariants:
    g2: complex
    g3: complex

    @property
    def discriminant(self) -> complex:
        return self.g2**3 - 27 * self.g3**2

    def is_degenerate(self, tols: Tolerances = DEFAULT) -> bool:
        scale = max(abs(self.g2) ** 3, 27 * abs(self.g3) ** 2)
        if scale == 0:
            return True
        return abs(self.discriminant) <= tols.degenerate * scale

    def cubic(self) -> PolyCoeffs:
        """4 t^3 - g2 t - g3."""
        return PolyCoeffs([-self.g3, -self.g2, 0, 4])

    def roots(self, tols: Tolerances = DEFAULT) -> list[complex]:
        out = []
        for r, m in roots_low_degree(self.cubic(), tols=tols):
            out.extend([r] * m)
        return out


def invariants_from_roots(
    e1: complex, e2: complex, e3: complex, *, tols: Tolerances = DEFAULT
) -> EllipticInvariants:
    """(g2, g3) such that 4 (x - e1)(x - e2)(x - e3) = 4x^3 - g2 x - g3."""
    e1, e2, e3 = as_complex(e1), as_complex(e2), as_complex(e3)
    scale = max(abs(e1), abs(e2), abs(e3), 1.0)
    if abs(e1 + e2 + e3) > tols.centered * scale:
        raise RootsNotCentered(f"root sum {e1 + e2 + e3} is not zero")
    g2 = -4 * (e1 * e2 + e1 * e3 + e2 * e3)
    g3 = 4 * e1 * e2 * e3
    return EllipticInvariants(g2, g3)


@dataclass(frozen=True)
class LatticeBasis:
    """Half-periods of a Weierstrass lattice.

    ``omega1`` is attached to the root of 4t^3 - g2 t - g3 with the largest
    real part; ``omega2`` is oriented so that Im(omega2 / omega1) > 0.
    """

    omega1: complex
    omega2: complex

    @property
    def cell_area(self) -> float:
        return 4 * abs((self.omega1.conjugate() * self.omega2).imag)

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1


def _elliprf(x: complex, y: complex, z: complex) -> complex:
    return complex(elliprf(complex(x), complex(y), complex(z)))


def lattice_periods(inv: EllipticInvariants, *, tols: Tolerances = DEFAULT) -> LatticeBasis:
    """Half-periods from Carlson's R_F of the root differences.

    With e_a the root of largest real part and e_c the root of smallest real
    part, both R_F argument triples stay off the negative real axis:
    ``omega_a = R_F(0, e_a - e_b, e_a - e_c)`` and, using
    ``wp(i z; g2, g3) = -wp(z; g2, -g3)``, ``omega_c = i R_F(0, e_a - e_c, e_b - e_c)``.
    """
    if inv.is_degenerate(tols):
        raise DegenerateLattice(f"discriminant {inv.discriminant} vanishes")
    roots = inv.roots(tols)
    if len(roots) != 3:
        raise DegenerateLattice("cubic has a repeated root")
    roots.sort(key=lambda e: (e.real, e.imag), reverse=True)
    ea, eb, ec = roots
    w1 = _elliprf(0, ea - eb, ea - ec)
    w2 = 1j * _elliprf(0, ea - ec, eb - ec)
    if (w2 / w1).imag < 0:
        w2 = -w2
    return LatticeBasis(w1, w2)


def principal_sqrt(x: complex) -> complex:
    return cmath.sqrt(x)
