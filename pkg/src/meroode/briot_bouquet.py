"""General solutions of (u')^2 = a_k prod (u - e_j) for k = 0..4.

Every branch is derived from one of three elementary cases:

* k = 3, distinct roots: u = mean(e) + (4/a3) wp(t; g2, g3), with the
  invariants of the centred, rescaled roots a3 (e_j - mean) / 4.
* k <= 2: quadratic, linear and constant right-hand sides integrate in terms
  of cosh, exp and polynomials.
* k = 4: the Moebius substitution y = 1/(u - e1), e1 a root of highest
  multiplicity, turns the quartic into a binomial equation of degree
  4 - m(e1) in y, which is solved by the cases above.

All solutions are written in t = z - z0.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import AtPole, ConstantDerivationFailed
from .numerics import PolyCoeffs, _elliprf, invariants_from_roots, lattice_periods, roots_low_degree
from .reductions import BBEquation
from .solutions import expr as ex
from .weierstrass import context_for

PATTERNS = {
    (4, (1, 1, 1, 1)): "Distinct4",
    (4, (2, 1, 1)): "Double4",
    (4, (2, 2)): "TwoDouble4",
    (4, (3, 1)): "Triple4",
    (4, (4,)): "Quad4",
    (3, (1, 1, 1)): "Distinct3",
    (3, (2, 1)): "Double3",
    (3, (3,)): "Triple3",
    (2, (1, 1)): "Distinct2",
    (2, (2,)): "Double2",
    (1, (1,)): "Deg1",
    (0, ()): "Deg0",
}


@dataclass(frozen=True)
class MultiplicityPattern:
    k: int
    pattern: str
    roots: tuple  # ((e, m), ...) sorted by decreasing multiplicity


def _ordered(roots) -> tuple:
    return tuple(sorted(roots, key=lambda rm: (-rm[1], round(rm[0].real, 12), round(rm[0].imag, 12))))


def bb_classify_roots(eq: BBEquation, tol: float | None = None, *, tols: Tolerances = DEFAULT) -> MultiplicityPattern:
    """Multiplicity pattern after clustering the roots within ``tol``."""
    if eq.is_trivial:
        return MultiplicityPattern(0, "Trivial", ())
    if eq.k == 0:
        return MultiplicityPattern(0, "Deg0", ())
    roots = eq.roots
    if tol is not None:
        roots = tuple(roots_low_degree(eq.poly, tol, tols=tols))
    roots = _ordered(roots)
    mults = tuple(m for _, m in roots)
    return MultiplicityPattern(eq.k, PATTERNS[(eq.k, mults)], roots)


def _t() -> ex.Expr:
    return ex.Z - ex.param("z0")


def _c(x) -> ex.Expr:
    return ex.const(complex(x))


def _sqrt(x) -> complex:
    return cmath.sqrt(complex(x))


def _cubic_distinct(a3: complex, roots: list[complex], t: ex.Expr, tols: Tolerances):
    """mean + (4/a3) wp(t) and the invariants used."""
    mean = sum(roots) / 3
    eps = [a3 * (e - mean) / 4 for e in roots]
    eps[2] = -(eps[0] + eps[1])  # exact centring
    inv = invariants_from_roots(*eps, tols=tols)
    return _c(mean) + _c(4 / a3) * ex.wp(t, inv.g2, inv.g3), inv


def _quadratic_distinct(a2: complex, e1: complex, e2: complex, t: ex.Expr) -> ex.Expr:
    return _c((e1 + e2) / 2) + _c((e1 - e2) / 2) * ex.cosh(_c(_sqrt(a2)) * t)


def bb_solve(eq: BBEquation, *, branch: int = 1, tols: Tolerances = DEFAULT) -> ex.Expr:
    """Closed-form general solution; ``branch`` picks the sign where the table has a +-.

    The result depends on z only through t = z - z0 (free parameter ``z0``);
    the trivial equation u' = 0 yields the free constant ``u0``.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    pat = bb_classify_roots(eq, tols=tols)
    t = _t()
    a = complex(eq.a_k)
    r = [complex(e) for e, _ in pat.roots]
    name = pat.pattern
    if name == "Trivial":
        return ex.param("u0")
    if name == "Deg0":
        return _c(branch * _sqrt(a)) * t
    if name == "Deg1":
        return _c(r[0]) + _c(a / 4) * ex.power(t, 2)
    if name == "Distinct2":
        return _quadratic_distinct(a, r[0], r[1], t)
    if name == "Double2":
        return _c(r[0]) + ex.exp(_c(branch * _sqrt(a)) * t)
    if name == "Distinct3":
        return _cubic_distinct(a, r, t, tols)[0]
    if name == "Double3":
        e1, e3 = r  # e1 double
        C = _sqrt(a * (e1 - e3)) / 2
        return _c(e3) + _c(e1 - e3) * ex.power(ex.coth(_c(C) * t), 2)
    if name == "Triple3":
        return _c(r[0]) + _c(4 / a) * ex.power(t, -2)
    if name == "Quad4":
        return _c(r[0]) + _c(branch / _sqrt(a)) * ex.power(t, -1)
    if name == "TwoDouble4":
        e1, e2 = r
        A = (e1 - e2) / 2
        return _c((e1 + e2) / 2) + _c(A) * ex.coth(_c(_sqrt(a) * A) * t)
    # remaining quartic patterns: y = 1/(u - e1) with e1 of highest multiplicity
    e1 = r[0]
    d = [e1 - e for e in r[1:]]
    if name == "Triple4":
        (d4,) = d
        y = _c(-1 / d4) + _c(a * d4 / 4) * ex.power(t, 2)
        return _c(e1) + ex.power(y, -1)
    if name == "Double4":
        d3, d4 = d
        y = _quadratic_distinct(a * d3 * d4, -1 / d3, -1 / d4, t)
        return _c(e1) + ex.power(y, -1)
    if name == "Distinct4":
        return _quartic_distinct(eq, a, e1, d, t, tols)
    raise AssertionError(name)  # pragma: no cover


def quartic_internal_constants(a: complex, e1: complex, d: list[complex], tols: Tolerances = DEFAULT) -> dict:
    """Invariants and wp(a) for the k = 4 distinct branch.

    u = e1 + K / (wp(t) - wp_a) with K = a * d2 d3 d4 / 4.
    """
    a3y = a * d[0] * d[1] * d[2]
    ys = [-1 / dj for dj in d]
    mean = sum(ys) / 3
    eps = [a3y * (y - mean) / 4 for y in ys]
    eps[2] = -(eps[0] + eps[1])
    inv = invariants_from_roots(*eps, tols=tols)
    return {"g2": inv.g2, "g3": inv.g3, "wp_a": -a3y * mean / 4, "K": a3y / 4, "wpp_a": -_sqrt(a) * a3y / 4}


def _quartic_distinct(eq, a, e1, d, t, tols) -> ex.Expr:
    k = quartic_internal_constants(a, e1, d, tols)
    expr = _c(e1) + _c(k["K"]) * ex.power(ex.wp(t, k["g2"], k["g3"]) - _c(k["wp_a"]), -1)
    _self_check(eq, expr, tols)
    return expr


def _self_check(eq: BBEquation, e: ex.Expr, tols: Tolerances) -> None:
    """Residual of the constructed solution at a few points; failure means bad constants."""
    pts = np.array([0.31 + 0.17j, -0.23 + 0.41j, 0.52 - 0.29j])
    u, du = ex.jet_arrays(e, pts, 1, {"z0": 0.0}, tols=tols)
    ok = np.isfinite(u) & np.isfinite(du)
    if not np.any(ok):
        return
    lhs = du[ok] ** 2
    rhs = eq.rhs(u[ok])
    rel = np.abs(lhs - rhs) / (1 + np.abs(u[ok])) ** 4
    if np.max(rel) > 1e-6:
        raise ConstantDerivationFailed(f"k = 4 constants fail the residual check ({np.max(rel):.3g})")


def _preimage_seed(value: complex, e: list[complex]) -> complex:
    """R_F(value - e1, value - e2, value - e3), rotating the arguments off the branch cut if needed.

    R_F is homogeneous of degree -1/2, so R_F(x) = sqrt(s) R_F(s x) up to a sign,
    and the sign is immaterial because -a is a preimage too.
    """
    args = [value - ej for ej in e]
    for phi in (0.0, 0.5, 1.3, 2.1, 2.9, 3.7):
        rot = cmath.exp(1j * phi)
        try:
            a = _elliprf(*(rot * x for x in args)) * cmath.sqrt(rot)
        except Exception as exc:  # pragma: no cover - scipy domain errors
            raise ConstantDerivationFailed(str(exc)) from exc
        if cmath.isfinite(a):
            return a
    raise ConstantDerivationFailed("no finite starting point for inverting wp")


def find_wp_preimage(g2: complex, g3: complex, value: complex, wpp_value: complex | None = None, *, tols=DEFAULT) -> complex:
    """A point a with wp(a) = value (and wp'(a) = wpp_value when given).

    Start from Carlson's R_F(value - e1, value - e2, value - e3), then polish by
    Newton on wp(a) - value and fix the sign from wp'.
    """
    ctx = context_for(g2, g3, tols)
    e = ctx.inv.roots(tols)
    scale = max(1.0, abs(value))
    for ej in e:
        if abs(value - ej) <= 1e-12 * scale:
            # wp - e_j has a double zero at a half-period; Newton would stall there
            b = lattice_periods(ctx.inv, tols=tols)
            for h in (b.omega1, b.omega2, b.omega1 + b.omega2):
                if abs(complex(ctx.evaluate(np.array([h]))[0][0]) - ej) <= 1e-8 * scale:
                    return h
    a = _preimage_seed(value, e)
    for _ in range(40):
        p, dp, _ = ctx.evaluate(np.array([a]))
        p, dp = complex(p[0]), complex(dp[0])
        if dp == 0:
            break
        step = (p - value) / dp
        a -= step
        if abs(step) < 1e-15 * max(1.0, abs(a)):
            break
    p, dp, _ = ctx.evaluate(np.array([a]))
    if abs(complex(p[0]) - value) > 1e-8 * max(1.0, abs(value)):
        raise ConstantDerivationFailed("could not invert wp at the requested value")
    if wpp_value is not None and abs(complex(dp[0]) + wpp_value) < abs(complex(dp[0]) - wpp_value):
        a = -a
    return a


def quartic_zeta_form(eq: BBEquation, *, tols: Tolerances = DEFAULT) -> ex.Expr:
    """a4^{-1/2} (zeta(t + a) - zeta(t - a) - 2 zeta(a) + A) for the k = 4 distinct branch.

    Used to cross-check the wp-ratio form returned by :func:`bb_solve`.
    """
    pat = bb_classify_roots(eq, tols=tols)
    if pat.pattern != "Distinct4":
        raise ValueError("zeta form only applies to four distinct roots")
    a = complex(eq.a_k)
    r = [complex(e) for e, _ in pat.roots]
    e1 = r[0]
    d = [e1 - e for e in r[1:]]
    k = quartic_internal_constants(a, e1, d, tols)
    shift = find_wp_preimage(k["g2"], k["g3"], k["wp_a"], k["wpp_a"], tols=tols)
    ctx = context_for(k["g2"], k["g3"], tols)
    try:
        zeta_a = complex(ctx.evaluate(np.array([shift]), want_zeta=True)[2][0])
    except AtPole as exc:  # pragma: no cover
        raise ConstantDerivationFailed(str(exc)) from exc
    t = _t()
    g2, g3 = k["g2"], k["g3"]
    s = _sqrt(a)
    body = ex.wzeta(t + _c(shift), g2, g3) - ex.wzeta(t - _c(shift), g2, g3) + _c(-2 * zeta_a + s * e1)
    return _c(1 / s) * body


def bb_residual(eq: BBEquation, e: ex.Expr, z, bindings) -> np.ndarray:
    """|(u')^2 - rhs(u)| / (1 + |u|)^4 at the points z."""
    u, du = ex.jet_arrays(e, np.asarray(z, dtype=complex), 1, bindings)
    return np.abs(du**2 - eq.rhs(u)) / (1 + np.abs(u)) ** 4


def bb_from_roots(a_k: complex, roots: list[tuple[complex, int]], *, tols: Tolerances = DEFAULT) -> BBEquation:
    """BBEquation with the given roots, re-derived through the coefficient form."""
    poly = PolyCoeffs.from_roots(roots, a_k)
    eq = BBEquation.from_poly(poly, tols=tols)
    return eq
