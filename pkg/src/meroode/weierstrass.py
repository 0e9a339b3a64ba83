"""Weierstrass wp, wp' and zeta from the invariants (g2, g3).

Arguments are first reduced modulo a Gauss-reduced period basis, then halved
until they sit well inside the disc of convergence of the Laurent expansion at
0, evaluated there, and doubled back with the duplication formulas

    wp(2u)  = -2 wp(u) + L^2,        L = wp''(u) / (2 wp'(u))
    wp'(2u) = -(wp'(u) + 2 L (wp(2u) - wp(u)))
    zeta(2u) = 2 zeta(u) + L

Lattice translations of zeta are restored with the quasi-periods
zeta(z + P) = zeta(z) + 2 zeta(P / 2). Degenerate invariants (vanishing
discriminant) use the closed trigonometric / rational forms instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import AtPole
from .numerics import EllipticInvariants, LatticeBasis, as_complex, lattice_periods


def laurent_coefficients(g2: complex, g3: complex, order: int) -> list[complex]:
    """c_2..c_order with wp(z) = z^-2 + sum_k c_k z^(2k-2)."""
    c = [0j] * (order + 1)
    if order >= 2:
        c[2] = g2 / 20
    if order >= 3:
        c[3] = g3 / 28
    for k in range(4, order + 1):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3 * s / ((2 * k + 1) * (k - 3))
    return c[2:]


def _gauss_reduce(p1: complex, p2: complex) -> tuple[complex, complex]:
    """Lagrange-Gauss reduction of a 2D lattice basis (shortest vectors first)."""
    if abs(p1) > abs(p2):
        p1, p2 = p2, p1
    while True:
        mu = round((p2 * p1.conjugate()).real / abs(p1) ** 2)
        p2 = p2 - mu * p1
        if abs(p2) >= abs(p1):
            break
        p1, p2 = p2, p1
    if (p2 / p1).imag < 0:
        p2 = -p2
    return p1, p2


@dataclass(frozen=True)
class WeierstrassContext:
    inv: EllipticInvariants
    series_order: int = DEFAULT.wp_series_order
    halving_threshold: float = DEFAULT.wp_halving_threshold
    tols: Tolerances = DEFAULT
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.series_order < 10:
            raise ValueError("series_order must be >= 10")
        if not (0 < self.halving_threshold <= 1):
            raise ValueError("halving_threshold must lie in (0, 1]")
        g2, g3 = self.inv.g2, self.inv.g3
        c = self._cache
        if g2 == 0 and g3 == 0:
            c["kind"] = "rational"
        elif self.inv.is_degenerate(self.tols):
            c["kind"] = "trig"
            e = -3 * g3 / (2 * g2)
            c["e"] = e
            c["s"] = cmath.sqrt(3 * e)
        else:
            c["kind"] = "elliptic"
            basis = lattice_periods(self.inv, tols=self.tols)
            c["basis"] = basis
            p1, p2 = _gauss_reduce(2 * basis.omega1, 2 * basis.omega2)
            c["periods"] = (p1, p2)
            m = np.array([[p1.real, p2.real], [p1.imag, p2.imag]])
            c["to_coords"] = np.linalg.inv(m)
            c["pmin"] = min(abs(p1), abs(p2))
            c["coef"] = np.array(laurent_coefficients(g2, g3, self.series_order))
            c["eta"] = None

    # -- lattice helpers -------------------------------------------------

    @property
    def kind(self) -> str:
        return self._cache["kind"]

    @property
    def basis(self) -> LatticeBasis | None:
        return self._cache.get("basis")

    @property
    def periods(self) -> tuple[complex, complex]:
        """Gauss-reduced full periods (elliptic case only)."""
        return self._cache["periods"]

    def shortest_period(self) -> float:
        k = self.kind
        if k == "elliptic":
            return self._cache["pmin"]
        if k == "trig":
            return abs(math.pi / self._cache["s"])
        return 1.0

    def reduce(self, z):
        """Split z = z_red + m P1 + n P2 with z_red in the centred cell."""
        z = np.asarray(z, dtype=complex)
        p1, p2 = self.periods
        inv = self._cache["to_coords"]
        x = inv[0, 0] * z.real + inv[0, 1] * z.imag
        y = inv[1, 0] * z.real + inv[1, 1] * z.imag
        m = np.round(x)
        n = np.round(y)
        return z - m * p1 - n * p2, m, n

    def nearest_lattice_point(self, z: complex) -> complex:
        k = self.kind
        if k == "elliptic":
            zr, m, n = self.reduce(np.array([z]))
            return complex(z - zr[0])
        if k == "trig":
            s = self._cache["s"]
            step = 1j * math.pi / s
            return complex(round((z / step).real) * step)
        return 0j

    # -- evaluation ------------------------------------------------------

    def _series(self, u, want_zeta: bool = True):
        coef = self._cache["coef"]
        u2 = u * u
        n = len(coef)
        # Horner in u^2 for sum_k c_k u^(2k-4), k = 2..n+1
        acc_p = np.zeros_like(u)
        acc_d = np.zeros_like(u)
        acc_z = np.zeros_like(u)
        for idx in range(n - 1, -1, -1):
            k = idx + 2
            acc_p = acc_p * u2 + coef[idx]
            acc_d = acc_d * u2 + coef[idx] * (2 * k - 2)
            if want_zeta:
                acc_z = acc_z * u2 + coef[idx] / (2 * k - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = 1 / u2 + acc_p * u2
            dp = -2 / (u2 * u) + acc_d * u
            zt = (1 / u - acc_z * u2 * u) if want_zeta else None
        return p, dp, zt

    def _eval_reduced(self, zr, want_zeta: bool):
        g2 = self.inv.g2
        pmin = self._cache["pmin"]
        amax = float(np.max(np.abs(zr))) if zr.size else 0.0
        target = self.halving_threshold * pmin
        nh = 0 if amax <= target else int(math.ceil(math.log2(amax / target)))
        u = zr / (2.0**nh)
        p, dp, zt = self._series(u, want_zeta)
        with np.errstate(divide="ignore", invalid="ignore"):
            for _ in range(nh):
                lam = (6 * p * p - g2 / 2) / (2 * dp)
                p2 = -2 * p + lam * lam
                dp = -(dp + 2 * lam * (p2 - p))
                if want_zeta:
                    zt = 2 * zt + lam
                p = p2
        return p, dp, zt

    def _eta(self):
        """zeta(P/2) for the two reduced periods."""
        if self._cache["eta"] is None:
            p1, p2 = self.periods
            half = np.array([p1 / 2, p2 / 2])
            _, _, zt = self._eval_reduced(half, True)
            self._cache["eta"] = (complex(zt[0]), complex(zt[1]))
        return self._cache["eta"]

    def evaluate(self, z, want_zeta: bool = False):
        """Vectorised (wp, wp', zeta) at an array of points; zeta is None unless requested.

        No pole checks: exact lattice points give inf/nan.
        """
        z = np.asarray(z, dtype=complex)
        kind = self.kind
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if kind == "rational":
                p = 1 / (z * z)
                dp = -2 / (z * z * z)
                zt = 1 / z if want_zeta else None
                return p, dp, zt
            if kind == "trig":
                e, s = self._cache["e"], self._cache["s"]
                sh = np.sinh(s * z)
                ch = np.cosh(s * z)
                p = e + s * s / (sh * sh)
                dp = -2 * s**3 * ch / sh**3
                zt = (-e * z + s * ch / sh) if want_zeta else None
                return p, dp, zt
        zr, m, n = self.reduce(z)
        flat = zr.ravel()
        p, dp, zt = self._eval_reduced(flat, want_zeta)
        p = p.reshape(z.shape)
        dp = dp.reshape(z.shape)
        if want_zeta:
            e1, e2 = self._eta()
            zt = zt.reshape(z.shape) + 2 * m * e1 + 2 * n * e2
        else:
            zt = None
        return p, dp, zt

    def check_pole(self, z: complex) -> None:
        lp = self.nearest_lattice_point(z)
        if abs(z - lp) <= self.tols.pole_proximity * self.shortest_period():
            raise AtPole(f"{z} is within the pole-proximity threshold of lattice point {lp}", lp)


@lru_cache(maxsize=256)
def context_for(g2: complex, g3: complex, tols: Tolerances = DEFAULT) -> WeierstrassContext:
    """Cached context per numeric invariant pair."""
    return WeierstrassContext(
        EllipticInvariants(complex(g2), complex(g3)),
        series_order=tols.wp_series_order,
        halving_threshold=tols.wp_halving_threshold,
        tols=tols,
    )


def wp_eval(ctx: WeierstrassContext, z) -> tuple[complex, complex]:
    """(wp(z), wp'(z)); raises AtPole near a lattice point."""
    z = as_complex(z)
    ctx.check_pole(z)
    p, dp, _ = ctx.evaluate(np.array([z]))
    return complex(p[0]), complex(dp[0])


def zeta_eval(ctx: WeierstrassContext, z) -> complex:
    z = as_complex(z)
    ctx.check_pole(z)
    _, _, zt = ctx.evaluate(np.array([z]), want_zeta=True)
    return complex(zt[0])
