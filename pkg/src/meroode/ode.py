"""The three autonomous second-order ODE families and their monomial form.

    Type1:  w w'' - w'^2 + P(w) = 0
    Type2:  w'' + c w'^2 + P(w) = 0
    Type3:  w'' + c w'   + P(w) = 0

Coefficients are kept as given (``complex`` or ``fractions.Fraction``) so the
local analysis can run in exact rational arithmetic when fed rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .numerics import PolyCoeffs

FAMILIES = ("Type1", "Type2", "Type3")


def _trim(coeffs: Sequence) -> tuple:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def poly_mul(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


@dataclass(frozen=True)
class OdeSpec:
    family: str
    P: tuple
    c: object = 0
    # optional normal-form data the input was given in (lambda, roots)
    normal_form: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "P", _trim(self.P))

    @property
    def degree(self) -> int:
        return max(len(self.P) - 1, 0)

    @property
    def poly(self) -> PolyCoeffs:
        return PolyCoeffs([complex(x) for x in self.P])

    def a(self, n: int):
        return self.P[n] if 0 <= n < len(self.P) else 0

    def monomials(self) -> list[tuple[object, tuple[int, int, int]]]:
        """(coefficient, (i0, i1, i2)) for every term coef * w^i0 w'^i1 w''^i2."""
        terms: list = []
        if self.family == "Type1":
            terms += [(1, (1, 0, 1)), (-1, (0, 2, 0))]
        elif self.family == "Type2":
            terms.append((1, (0, 0, 1)))
            if self.c != 0:
                terms.append((self.c, (0, 2, 0)))
        else:
            terms.append((1, (0, 0, 1)))
            if self.c != 0:
                terms.append((self.c, (0, 1, 0)))
        for n, a in enumerate(self.P):
            if a != 0:
                terms.append((a, (n, 0, 0)))
        return terms

    def residual_terms(self, w, dw, d2w) -> list:
        """Individual term values of the left-hand side (numbers or arrays)."""
        out = []
        for coef, (i0, i1, i2) in self.monomials():
            out.append(coef * w**i0 * dw**i1 * d2w**i2)
        return out

    # -- normal-form constructors ------------------------------------------

    @classmethod
    def type3_cubic(cls, lam, q: Sequence, c) -> "OdeSpec":
        """w'' + c w' - (2/lam^2) (w-q1)(w-q2)(w-q3) = 0."""
        prod = [1]
        for qi in q:
            prod = poly_mul(prod, [-qi, 1])
        k = _div(-2, lam * lam)
        return cls("Type3", tuple(k * x for x in prod), c, {"lambda": lam, "q": tuple(q)})

    @classmethod
    def type3_quadratic(cls, lam, e: Sequence, c) -> "OdeSpec":
        """w'' + c w' - (6/lam) (w-e1)(w-e2) = 0."""
        prod = poly_mul([-e[0], 1], [-e[1], 1])
        k = _div(-6, lam)
        return cls("Type3", tuple(k * x for x in prod), c, {"lambda": lam, "e": tuple(e)})


def _div(a, b):
    if isinstance(b, (int, Fraction)) and isinstance(a, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    return a / b
