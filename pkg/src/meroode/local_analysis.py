"""Formal Laurent expansions at a movable pole, and the degree/weight test.

A branch w = sum_n w_n t^(n+p), t = z - z0, is found in three steps:

1. :func:`dominant_balance` picks the negative integer exponents p at which at
   least two monomials of different degree share the lowest order, and solves
   the resulting polynomial for the leading coefficient w_0.
2. The linearisation of the dominant monomials around w_0 t^p gives the
   indicial polynomial Q(n); its integer roots are the Fuchs indices.
3. :func:`formal_expand` fixes w_n = -f_n / Q(n), where f_n is the residual
   coefficient at order base+n computed with w_n = 0. At a nonnegative Fuchs
   index Q(n) = 0 and f_n itself is the compatibility obstruction.

Arithmetic is generic: feed ``Fraction`` coefficients and everything stays
exact; feed complex numbers and it runs in floating point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .numerics import PolyCoeffs, roots_low_degree
from .ode import OdeSpec

_INF = 10**9


class LaurentSeries:
    """Truncated Laurent series sum_{e >= lead} c_e t^e, exact for e < upto."""

    __slots__ = ("lead", "coeffs", "upto")

    def __init__(self, lead: int, coeffs: Sequence, upto: int | None = None):
        self.lead = lead
        self.coeffs = list(coeffs)
        self.upto = lead + len(self.coeffs) if upto is None else upto
        if self.upto < _INF:
            n = self.upto - self.lead
            if len(self.coeffs) > n:
                self.coeffs = self.coeffs[: max(n, 0)]
            elif len(self.coeffs) < n:
                self.coeffs += [0] * (n - len(self.coeffs))

    @classmethod
    def constant(cls, value) -> "LaurentSeries":
        return cls(0, [value], _INF)

    @property
    def truncation_order(self) -> int:
        return self.upto

    def __getitem__(self, e: int):
        if e >= self.upto:
            raise IndexError(f"coefficient t^{e} beyond truncation t^{self.upto}")
        i = e - self.lead
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def normalized(self) -> "LaurentSeries":
        """Strip exact leading zeros so the coefficient at ``lead`` is nonzero."""
        k = 0
        while k < len(self.coeffs) and self.coeffs[k] == 0:
            k += 1
        if k == len(self.coeffs):
            return LaurentSeries(self.upto, [], self.upto)
        return LaurentSeries(self.lead + k, self.coeffs[k:], self.upto)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(other)
        lead = min(self.lead, other.lead)
        upto = min(self.upto, other.upto)
        if upto >= _INF:
            hi = max(self.lead + len(self.coeffs), other.lead + len(other.coeffs))
            n = hi - lead
        else:
            n = upto - lead
        coeffs = []
        for e in range(lead, lead + n):
            coeffs.append(_get(self, e) + _get(other, e))
        return LaurentSeries(lead, coeffs, upto)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.lead, [-c for c in self.coeffs], self.upto)

    def __sub__(self, other):
        return self + (-other if isinstance(other, LaurentSeries) else -other)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return LaurentSeries(self.lead, [c * other for c in self.coeffs], self.upto)
        lead = self.lead + other.lead
        upto = min(self.upto + other.lead, other.upto + self.lead)
        if upto >= _INF:
            n = len(self.coeffs) + len(other.coeffs) - 1
            upto = _INF
        else:
            n = upto - lead
        coeffs = [0] * max(n, 0)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j >= n:
                    break
                coeffs[i + j] += a * b
        return LaurentSeries(lead, coeffs, upto)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not supported")
        out = LaurentSeries.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def deriv(self) -> "LaurentSeries":
        coeffs = [(self.lead + i) * c for i, c in enumerate(self.coeffs)]
        upto = self.upto - 1 if self.upto < _INF else _INF
        return LaurentSeries(self.lead - 1, coeffs, upto)

    def __repr__(self):
        return f"LaurentSeries(lead={self.lead}, coeffs={self.coeffs!r}, upto={self.upto})"


def _get(s: LaurentSeries, e: int):
    i = e - s.lead
    return s.coeffs[i] if 0 <= i < len(s.coeffs) else 0


def ode_residual_series(ode: OdeSpec, w: LaurentSeries) -> LaurentSeries:
    dw = w.deriv()
    d2w = dw.deriv()
    total = None
    for coef, (i0, i1, i2) in ode.monomials():
        term = (w**i0) * (dw**i1) * (d2w**i2) * coef
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class LocalBranch:
    p: int
    leading_coeff: object
    fuchs_indices: tuple = ()
    obstructions: tuple = ()  # ((index, value), ...)
    series: LaurentSeries | None = field(default=None, compare=False)
    indicial: tuple = ()  # (q0, q1, q2): Q(n) = q0 + q1 n + q2 n^2
    flags: tuple = ()

    def obstruction_at(self, index: int):
        for i, v in self.obstructions:
            if i == index:
                return v
        return None


def _phi(p: int, i1: int, i2: int):
    return (p**i1) * ((p * (p - 1)) ** i2)


def _branch_order_key(x) -> tuple:
    z = complex(x)
    # "+" branch first: larger real part, then larger imaginary part
    return (-round(z.real, 12), -round(z.imag, 12))


def _leading_roots(poly: list, exact: bool) -> list:
    """Nonzero roots of sum_d poly[d] w0^d."""
    lo = next(i for i, c in enumerate(poly) if c != 0)
    reduced = poly[lo:]
    while reduced and reduced[-1] == 0:
        reduced.pop()
    if len(reduced) < 2:
        return []
    if exact and all(isinstance(c, (int, Fraction)) for c in reduced):
        roots = _rational_roots(reduced)
        if roots is not None:
            return roots
    found = roots_low_degree(PolyCoeffs([complex(c) for c in reduced]))
    out = []
    for r, m in found:
        if abs(r) > 1e-14:
            out.append(r)
    return out


def _rational_roots(coeffs: list) -> list | None:
    """Exact roots of a binomial a + b x^m or a linear/quadratic with rational roots."""
    nz = [(i, c) for i, c in enumerate(coeffs) if c != 0]
    if len(nz) == 2 and nz[0][0] == 0:
        (_, a), (m, b) = nz
        target = Fraction(-a) / Fraction(b)
        if m == 1:
            return [target]
        if m == 2:
            r = _frac_sqrt(target)
            if r is not None:
                return [r, -r] if r != 0 else [r]
        return None
    if len(coeffs) == 3:
        c0, c1, c2 = (Fraction(x) for x in coeffs)
        disc = c1 * c1 - 4 * c0 * c2
        r = _frac_sqrt(disc)
        if r is None:
            return None
        return [(-c1 + r) / (2 * c2), (-c1 - r) / (2 * c2)]
    return None


def _frac_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def dominant_balance(ode: OdeSpec, exact: bool = False) -> list[LocalBranch]:
    """All (p, w0) leading balances with integer p < 0, '+' branch first."""
    mons = ode.monomials()
    info = [(c, e, sum(e), e[1] + 2 * e[2]) for c, e in mons]
    candidates = set()
    for a in range(len(info)):
        for b in range(a + 1, len(info)):
            da, sa = info[a][2], info[a][3]
            db, sb = info[b][2], info[b][3]
            if da == db:
                continue
            num, den = sa - sb, da - db
            if num % den == 0 and num // den < 0:
                candidates.add(num // den)
    branches = []
    for p in sorted(candidates, reverse=True):
        orders = [d * p - s for _, _, d, s in info]
        base = min(orders)
        dom = [info[i] for i in range(len(info)) if orders[i] == base]
        poly = [0] * (max(d for _, _, d, _ in dom) + 1)
        for c, (i0, i1, i2), d, _ in dom:
            poly[d] += c * _phi(p, i1, i2)
        if sum(1 for x in poly if x != 0) < 2:
            continue
        for w0 in sorted(_leading_roots(poly, exact), key=_branch_order_key):
            branches.append(LocalBranch(p=p, leading_coeff=w0))
    return branches


def _dominant_order(ode: OdeSpec, p: int) -> int:
    return min(sum(e) * p - (e[1] + 2 * e[2]) for _, e in ode.monomials())


def indicial_value(ode: OdeSpec, p: int, w0, n):
    """Q(n): coefficient of eps t^(base+n) when w = w0 t^p (1 + eps t^n)."""
    base = _dominant_order(ode, p)
    total = 0
    for c, (i0, i1, i2) in ode.monomials():
        d = i0 + i1 + i2
        if d * p - (i1 + 2 * i2) != base:
            continue
        a = _phi(p, i1, i2)
        lin = i0 * a
        if i1:
            lin += i1 * Fraction(n + p, p) * a
        if i2:
            r = Fraction((n + p) * (n + p - 1), p * (p - 1))
            lin += i2 * r * a
        total += c * (w0**d) * lin
    return total


def _indicial_poly(ode: OdeSpec, p: int, w0) -> tuple:
    v0, v1, v2 = (indicial_value(ode, p, w0, n) for n in (0, 1, 2))
    q2 = (v2 - 2 * v1 + v0) / 2
    q1 = v1 - v0 - q2
    q0 = v0
    return q0, q1, q2


def _is_zero(x, scale: float, tol: float) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) <= tol * max(scale, 1e-300)


def fuchs_indices(indicial: tuple, tol: float = 1e-8) -> tuple[tuple[int, ...], bool]:
    """Integer roots of q0 + q1 n + q2 n^2 and whether every root is an integer."""
    q0, q1, q2 = indicial
    exact = all(isinstance(x, (int, Fraction)) for x in indicial)
    scale = max(abs(complex(q0)), abs(complex(q1)), abs(complex(q2)))
    if _is_zero(q2, scale, tol):
        if _is_zero(q1, scale, tol):
            return (), False
        roots = [-q0 / q1]
    else:
        if exact:
            disc = Fraction(q1) ** 2 - 4 * Fraction(q0) * Fraction(q2)
            r = _frac_sqrt(disc)
            if r is None:
                return (), False
            roots = [(-q1 + r) / (2 * q2), (-q1 - r) / (2 * q2)]
        else:
            disc = cmath.sqrt(complex(q1) ** 2 - 4 * complex(q0) * complex(q2))
            roots = [(-q1 + disc) / (2 * q2), (-q1 - disc) / (2 * q2)]
    ints = []
    all_int = True
    for r in roots:
        if exact:
            r = Fraction(r)
            if r.denominator == 1:
                ints.append(int(r))
            else:
                all_int = False
            continue
        z = complex(r)
        n = round(z.real)
        val = complex(q0 + q1 * n + q2 * n * n)
        if abs(z - n) < 1e-6 and abs(val) <= tol * max(scale, 1.0) * (1 + n * n):
            ints.append(int(n))
        else:
            all_int = False
    return tuple(sorted(set(ints))), all_int


def formal_expand(
    ode: OdeSpec, branch: LocalBranch, order: int, *, tol: float = 1e-9
) -> LocalBranch:
    """Complete a leading balance with Fuchs indices, coefficients and obstructions.

    Coefficients w_1..w_order are computed; at a nonnegative Fuchs index the
    free coefficient is set to 0 and the residual there is reported as the
    obstruction.
    """
    p, w0 = branch.p, branch.leading_coeff
    indicial = _indicial_poly(ode, p, w0)
    idx, all_int = fuchs_indices(indicial)
    flags = list(branch.flags)
    if not all_int:
        flags.append("non_integer_fuchs")
    if idx and order < max(idx) + 1:
        raise ValueError(f"order must be >= {max(idx) + 1} to reach every Fuchs index")
    base = _dominant_order(ode, p)
    coeffs = [w0]
    obstructions = []
    scale = max((abs(complex(c)) for c, _ in ode.monomials()), default=1.0) * max(abs(complex(w0)), 1.0) ** 4
    for n in range(1, order + 1):
        trial = LaurentSeries(p, coeffs + [0])
        res = ode_residual_series(ode, trial)
        f = res[base + n]
        q = indicial[0] + indicial[1] * n + indicial[2] * n * n
        if n in idx:
            obstructions.append((n, f))
            coeffs.append(0)
        else:
            # the residual is linear in w_n with slope Q(n) / w0
            coeffs.append(-f * w0 / q)
    series = LaurentSeries(p, coeffs)
    return replace(
        branch,
        fuchs_indices=idx,
        obstructions=tuple(obstructions),
        series=series,
        indicial=indicial,
        flags=tuple(flags),
    )


def expand_all(ode: OdeSpec, order: int, exact: bool = False) -> list[LocalBranch]:
    return [formal_expand(ode, b, order) for b in dominant_balance(ode, exact=exact)]


# -- degree / weight criterion for entire solutions ------------------------


@dataclass(frozen=True)
class MultiIndexTerm:
    """a(z) * w^i0 (w')^i1 ... (w^(n))^in with polynomial coefficient a(z)."""

    coeff: tuple  # ascending coefficients of a(z)
    exponents: tuple

    @property
    def coeff_poly_degree(self) -> int:
        c = list(self.coeff)
        while c and c[-1] == 0:
            c.pop()
        return max(len(c) - 1, 0)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def weight(self) -> int:
        return sum((k + 1) * i for k, i in enumerate(self.exponents))


@dataclass(frozen=True)
class HaymanResult:
    applicable: bool
    bound: float | None
    d: int
    top_degree: int
    top_weight: int
    omega_sum: tuple


def hayman_order_bound(terms: Sequence[MultiIndexTerm]) -> HaymanResult:
    """Order bound max{2d, 1+d} for entire solutions, when the top-weight sum is nonzero."""
    if not terms:
        raise ValueError("need at least one term")
    top_deg = max(t.degree for t in terms)
    lam = [t for t in terms if t.degree == top_deg]
    top_wt = max(t.weight for t in lam)
    omega = [t for t in lam if t.weight == top_wt]
    n = max(len(t.coeff) for t in omega)
    total = [sum(t.coeff[i] if i < len(t.coeff) else 0 for t in omega) for i in range(n)]
    d = max(t.coeff_poly_degree for t in terms)
    if all(x == 0 for x in total):
        return HaymanResult(False, None, d, top_deg, top_wt, tuple(total))
    return HaymanResult(True, float(max(2 * d, 1 + d)), d, top_deg, top_wt, tuple(total))


def hayman_terms(ode: OdeSpec) -> list[MultiIndexTerm]:
    return [MultiIndexTerm((c,), e) for c, e in ode.monomials()]


def required_order(ode: OdeSpec, branch: LocalBranch) -> int:
    """Smallest truncation order that reaches every nonnegative Fuchs index."""
    idx, _ = fuchs_indices(_indicial_poly(ode, branch.p, branch.leading_coeff))
    return max([i for i in idx if i >= 0], default=0) + 1
