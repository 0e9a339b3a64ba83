"""Exact reductions of the second-order families to first-order binomial equations.

* Type1 with a2 = 0: multiplying by w^-3 w' and integrating gives
  (w')^2 = -a4 w^4 - 2 a3 w^3 - 2 C w^2 + 2 a1 w + a0.
* Type2: d/dz [e^{2cw} w'^2] = -2 e^{2cw} w' P(w). For c != 0 the primitive is
  e^{2cw} F(w) with F' + 2cF = P, and a meromorphic solution forces the
  integration constant to vanish, so (w')^2 = -2 F(w). For c = 0 the usual
  energy integral (w')^2 = C - 2 int_0^w P gives a free constant.
* Type3 cubic: the operator factorisation [D - f2(w)][D - f1(w)](w - alpha) and
  the substitution chain w = (lam/2) H'/H, H(z) = v(xi), xi = e^{-delta z / lam}
  that lands on a cubic binomial equation in v.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import NoFactorization, NoMeromorphicSolutions, ParticularOnly
from .numerics import PolyCoeffs, roots_low_degree
from .ode import poly_mul
from .solutions import expr as ex
from .solutions.closed_forms import riccati_pair


def _scale(values) -> float:
    return max([abs(complex(v)) for v in values] + [1.0])


def _is_zero(x, scale: float, tols: Tolerances) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(complex(x)) <= tols.zero * scale


def _pad(coeffs: Sequence, n: int = 5) -> tuple:
    c = list(coeffs)[:n]
    return tuple(c + [0] * (n - len(c)))


@dataclass(frozen=True)
class BBEquation:
    """(u')^2 = a_k prod_j (u - e_j)^{m_j}; ``k = 0`` with ``a_k = 0`` is the trivial u' = 0."""

    k: int
    a_k: complex
    roots: tuple  # ((e_j, m_j), ...)
    free_params: tuple = ()

    @classmethod
    def from_poly(cls, poly: PolyCoeffs, *, tols: Tolerances = DEFAULT, free_params=()) -> "BBEquation":
        if poly.degree > 4:
            raise NoMeromorphicSolutions(f"binomial equation of degree {poly.degree} > 4")
        if poly.is_zero:
            return cls(0, 0j, (), tuple(free_params))
        k = poly.degree
        roots = tuple(roots_low_degree(poly, tols=tols)) if k >= 1 else ()
        return cls(k, complex(poly.leading), roots, tuple(free_params))

    @property
    def is_trivial(self) -> bool:
        return self.a_k == 0

    @property
    def poly(self) -> PolyCoeffs:
        return PolyCoeffs.from_roots(self.roots, self.a_k) if not self.is_trivial else PolyCoeffs([])

    def rhs(self, u):
        out = self.a_k
        for e, m in self.roots:
            out = out * (u - e) ** m
        return out

    def multiplicities(self) -> tuple[int, ...]:
        return tuple(sorted((m for _, m in self.roots), reverse=True))


@dataclass(frozen=True)
class BBFamily:
    """A binomial equation whose right-hand side is affine in named constants.

    rhs(u) = base(u) + sum_name value(name) * linear[name](u); coefficients
    ascending in u.
    """

    base: tuple
    linear: Mapping[str, tuple] = field(default_factory=dict)
    variable: str = "w"

    @property
    def free_params(self) -> tuple[str, ...]:
        return tuple(sorted(self.linear))

    def coefficients(self, bindings: Mapping[str, object] | None = None) -> list:
        bindings = bindings or {}
        out = list(_pad(self.base))
        for name, coeffs in self.linear.items():
            if name not in bindings:
                from .errors import UnboundParam

                raise UnboundParam(f"constant {name!r} must be bound before solving")
            v = bindings[name]
            for i, c in enumerate(_pad(coeffs)):
                out[i] = out[i] + v * c
        return out

    def bind(self, bindings: Mapping[str, object] | None = None, *, tols: Tolerances = DEFAULT) -> BBEquation:
        coeffs = self.coefficients(bindings)
        return BBEquation.from_poly(PolyCoeffs([complex(c) for c in coeffs]), tols=tols)

    def describe(self) -> str:
        terms = []
        names = sorted(self.linear)
        for n in range(4, -1, -1):
            parts = []
            b = _pad(self.base)[n]
            if b != 0:
                parts.append(_num(b))
            for name in names:
                c = _pad(self.linear[name])[n]
                if c != 0:
                    parts.append(f"{_num(c)}*{name}" if c != 1 else name)
            if parts:
                coef = parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"
                u = self.variable
                mono = "" if n == 0 else (u if n == 1 else f"{u}^{n}")
                terms.append(coef if not mono else f"{coef}*{mono}")
        return f"({self.variable}')^2 = " + (" + ".join(terms) if terms else "0")


def _num(x) -> str:
    if isinstance(x, (int, Fraction)):
        return str(x)
    x = complex(x)
    return format(x.real, ".12g") if x.imag == 0 else f"({x.real:.12g}{x.imag:+.12g}j)"


# -- Type1 / Type2 -------------------------------------------------------------


def reduce_type1(P: Sequence, *, tols: Tolerances = DEFAULT) -> BBFamily:
    """(w')^2 = -a4 w^4 - 2 a3 w^3 - 2 C w^2 + 2 a1 w + a0, valid only when a2 = 0."""
    P = list(P)
    while P and P[-1] == 0:
        P.pop()
    if len(P) - 1 > 4:
        raise NoMeromorphicSolutions(f"degree {len(P) - 1} > 4 admits no nonconstant meromorphic solution")
    a = _pad(P)
    if not _is_zero(a[2], _scale(P), tols):
        raise NoMeromorphicSolutions("a2 != 0: the integrated equation carries a logarithm of w")
    base = (a[0], 2 * a[1], 0, -2 * a[3], -a[4])
    return BBFamily(base, {"C": (0, 0, -2, 0, 0)})


def type2_primitive(c, P: Sequence) -> list:
    """Polynomial F with F' + 2cF = P (c != 0), ascending coefficients."""
    P = list(P)
    n = len(P)
    F = [0] * n
    two_c = 2 * c
    for m in range(n - 1, -1, -1):
        nxt = (m + 1) * F[m + 1] if m + 1 < n else 0
        F[m] = _div(P[m] - nxt, two_c)
    return F


def _div(a, b):
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    return a / b


def reduce_type2(c, P: Sequence, *, tols: Tolerances = DEFAULT) -> BBFamily:
    """Binomial first-order form of w'' + c w'^2 + P(w) = 0."""
    P = list(P)
    while P and P[-1] == 0:
        P.pop()
    k = len(P) - 1
    if c != 0:
        if k > 4:
            raise NoMeromorphicSolutions(f"c != 0 and degree {k} > 4")
        F = type2_primitive(c, P)
        return BBFamily(tuple(-2 * f for f in F) if F else (0,), {})
    if k > 3:
        raise NoMeromorphicSolutions(f"c = 0 and degree {k} > 3")
    base = [0] + [-2 * _div(a, n + 1) for n, a in enumerate(P)]
    return BBFamily(tuple(base), {"C": (1,)})


# -- Type3 cubic factorisation --------------------------------------------------


@dataclass(frozen=True)
class Factorization:
    """[D - A2 w - B2][D - A1 w - B1](w - alpha) for the permuted roots Q and lam_s = sign * lam."""

    A1: object
    B1: object
    A2: object
    B2: object
    alpha: object
    permutation: tuple
    sign: int
    Q: tuple
    lam_s: object

    def first_order_coefficient(self):
        """Constant coefficient of w' in the expanded operator (must equal c)."""
        return -(self.B1 + self.B2 - self.alpha * self.A1)

    def expanded(self) -> dict:
        """Coefficients of the expanded operator: w' coefficient polynomial and P(w)."""
        wprime = [-(self.B1 + self.B2 - self.alpha * self.A1), -(2 * self.A1 + self.A2)]
        f1f2 = poly_mul([self.B1, self.A1], [self.B2, self.A2])
        p = poly_mul(f1f2, [-self.alpha, 1])
        return {"wprime": wprime, "P": p}


def factorize_type3_cubic(lam, q: Sequence, c, *, tols: Tolerances = DEFAULT) -> Factorization:
    """Find (A1, B1, A2, B2, alpha) with c = (-Q1 + 2 Q2 - Q3) / (s lam).

    Search order: sign s = +1 then -1, permutations in lexicographic order.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    scale = _scale(list(q) + [c * lam])
    for s in (1, -1):
        lam_s = s * lam
        for perm in itertools.permutations(range(3)):
            Q = tuple(q[i] for i in perm)
            target = _div(-Q[0] + 2 * Q[1] - Q[2], lam_s)
            if _is_zero(c - target, scale / abs(complex(lam)), tols):
                return Factorization(
                    A1=_div(-1, lam_s),
                    B1=_div(Q[2], lam_s),
                    A2=_div(2, lam_s),
                    B2=_div(-2 * Q[1], lam_s),
                    alpha=Q[0],
                    permutation=perm,
                    sign=s,
                    Q=Q,
                    lam_s=lam_s,
                )
    raise NoFactorization("c matches no permutation/sign of the factorisation pattern")


# -- substitution chain ----------------------------------------------------------


@dataclass(frozen=True)
class SubstitutionStep:
    """One exact change of variables.

    ``forward`` maps an expression in the inner unknown to one in the outer
    unknown; ``inverse`` maps numeric outer values back (given a callable of z,
    returns a callable of z).
    """

    name: str
    description: str
    forward: Callable[[ex.Expr], ex.Expr]
    inverse: Callable[[Callable], Callable]


@dataclass(frozen=True)
class SubstitutionChain:
    steps: tuple[SubstitutionStep, ...]

    def forward(self, inner: ex.Expr) -> ex.Expr:
        """Apply the steps innermost first (the last step acts on ``inner`` first)."""
        out = inner
        for step in reversed(self.steps):
            out = step.forward(out)
        return out

    def inverse(self, outer: Callable) -> Callable:
        out = outer
        for step in self.steps:
            out = step.inverse(out)
        return out

    def describe(self) -> list[str]:
        return [f"{s.name}: {s.description}" for s in self.steps]


def _path_integral(f: Callable, z_ref: complex, z: np.ndarray, nodes: int = 48) -> np.ndarray:
    """Gauss-Legendre integral of f along straight segments z_ref -> z."""
    x, wts = np.polynomial.legendre.leggauss(nodes)
    z = np.asarray(z, dtype=complex)
    half = (z - z_ref) / 2
    pts = z_ref + half[..., None] * (x + 1)
    vals = f(pts.ravel()).reshape(pts.shape)
    return (vals * wts).sum(axis=-1) * half


def _translate_step(shift) -> SubstitutionStep:
    shift_c = complex(shift)
    return SubstitutionStep(
        "translate",
        f"w = W + {_num(shift)}",
        lambda e: e + ex.const(shift_c),
        lambda f: (lambda z: f(z) - shift_c),
    )


def _log_derivative_step(lam_s, z_ref: complex) -> SubstitutionStep:
    lam_c = complex(lam_s)

    def inv(f):
        # H = exp((2/lam) int W), normalised to 1 at z_ref
        return lambda z: np.exp(2 / lam_c * _path_integral(f, z_ref, z))

    return SubstitutionStep(
        "log-derivative",
        f"W = ({_num(lam_s)}/2) H'/H",
        lambda e: ex.const(lam_c / 2) * e.diff() * ex.power(e, -1),
        inv,
    )


def _exp_variable_step(rate) -> SubstitutionStep:
    rate_c = complex(rate)
    xi = ex.exp(ex.const(rate_c) * ex.Z)
    return SubstitutionStep(
        "exponential-variable",
        f"H(z) = v(xi), xi = exp({_num(rate)} z)",
        lambda e: ex.substitute(e, z=xi),
        lambda f: f,  # values of H and v agree pointwise once xi is substituted
    )


@dataclass(frozen=True)
class Type3Reduction:
    """Cubic binomial equation in v(xi) and the chain back to w(z)."""

    factorization: Factorization
    bb: BBFamily
    chain: SubstitutionChain
    shift: object  # the midpoint root Q3
    delta: object  # Q2 - Q3
    lam_s: object
    xi_rate: object  # xi = exp(xi_rate * z)


def reduce_type3_to_bb(
    fact: Factorization, lam, q: Sequence, c, *, tols: Tolerances = DEFAULT, z_ref: complex = 0.1 + 0.05j
) -> Type3Reduction:
    """Chain w -> W -> H -> v for the half-sum case Q3 = (Q1 + Q2)/2.

    After translating by Q3 the roots are (-delta, delta, 0), and with
    xi = e^{-delta z / lam_s}, H(z) = v(xi) satisfies
    (v')^2 = (2 beta lam_s / delta^2) v^3 - C v.
    """
    Q1, Q2, Q3 = fact.Q
    scale = _scale(fact.Q)
    if not _is_zero(2 * Q3 - Q1 - Q2, scale, tols):
        raise ParticularOnly(
            "half-sum condition fails: only the beta = 0 (Riccati) family is meromorphic",
            families=[particular_solution(fact)],
        )
    delta = Q2 - Q3
    lam_s = fact.lam_s
    bb = BBFamily((0, 0, 0, 0, 0), {"beta": (0, 0, 0, _div(2 * lam_s, delta * delta)), "C": (0, -1)}, variable="v")
    rate = _div(-delta, lam_s)
    chain = SubstitutionChain(
        (_translate_step(Q3), _log_derivative_step(lam_s, z_ref), _exp_variable_step(rate))
    )
    return Type3Reduction(fact, bb, chain, Q3, delta, lam_s, rate)


def particular_solution(fact: Factorization) -> ex.Expr:
    """beta = 0: [D + w/lam_s - B1](w - alpha) = 0, i.e. w' = -(w - Q1)(w - Q3)/lam_s."""
    Q1, _, Q3 = fact.Q
    return riccati_pair(Q1, Q3, fact.lam_s)
