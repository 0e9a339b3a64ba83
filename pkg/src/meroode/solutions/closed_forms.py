"""Builders for the explicit solution families of the three ODE families.

Each builder returns an expression in ``Z`` whose remaining free parameters
are :class:`~meroode.solutions.expr.Param` nodes; the caller records their
names and domains.
"""

from __future__ import annotations

from .expr import (
    Expr,
    Z,
    add,
    const,
    cos,
    cosh,
    exp,
    mul,
    param,
    power,
    sin,
    wp,
    wp_prime,
)


def shifted(z0: str = "z0") -> Expr:
    return Z - param(z0)


def exp_quadratic(a2) -> Expr:
    """c1 exp(-a2 z^2 / 2 + c2 z)."""
    a2 = const(a2)
    return param("c1") * exp(mul(const(-0.5), a2, power(Z, 2)) + param("c2") * Z)


def exp_linear() -> Expr:
    """c1 exp(c2 z): the trivial P = 0 case of the quotient form."""
    return param("c1") * exp(param("c2") * Z)


def cosh_family(amplitude: Expr, offset: Expr) -> Expr:
    """amplitude * cosh(beta z + gamma) + offset, beta and gamma free."""
    return amplitude * cosh(param("beta") * Z + param("gamma")) + offset


def type1_k0_cosh(a0) -> Expr:
    """w = sqrt(-a0) / beta * cosh(beta z + gamma) solves w w'' - w'^2 + a0 = 0."""
    a0 = complex(a0)
    amp = const((-a0) ** 0.5) / param("beta")
    return cosh_family(amp, const(0))


def type1_k0_linear(a0) -> Expr:
    """w = sqrt(a0) (z - z0): the beta -> 0 member."""
    return const(complex(a0) ** 0.5) * shifted()


def type1_k1_cosh(a0, a1) -> Expr:
    """w = A cosh(beta z + gamma) - a1 / beta^2 with A^2 = (a1^2 - a0 beta^2) / beta^4.

    The square root is taken on the expression level through ``A = s / beta^2``
    with ``s`` a bound parameter, so the family is written in (beta, gamma)
    with ``s`` fixed by :func:`type1_k1_bindings`.
    """
    a1 = const(a1)
    beta = param("beta")
    amp = param("s") / power(beta, 2)
    return amp * cosh(beta * Z + param("gamma")) - a1 / power(beta, 2)


def type1_k1_amplitude(a0, a1, beta) -> complex:
    """s with s^2 = a1^2 - a0 beta^2 (principal root)."""
    return complex(complex(a1) ** 2 - complex(a0) * complex(beta) ** 2) ** 0.5


def type1_k1_polynomial(a0, a1) -> Expr:
    """w = (a1/2) z^2 + b z + (b^2 - a0) / (2 a1)."""
    a0, a1 = complex(a0), complex(a1)
    b = param("b")
    return const(a1 / 2) * power(Z, 2) + b * Z + (power(b, 2) - const(a0)) * const(1 / (2 * a1))


def trig_family(a0, a1) -> Expr:
    """c1 sin(sqrt(a1) z) + c2 cos(sqrt(a1) z) - a0 / a1."""
    a0, a1 = complex(a0), complex(a1)
    k = const(a1**0.5)
    return param("c1") * sin(k * Z) + param("c2") * cos(k * Z) - const(a0 / a1)


def quadratic_family(a0) -> Expr:
    """c1 + c2 z - a0 z^2 / 2."""
    return param("c1") + param("c2") * Z - const(complex(a0) / 2) * power(Z, 2)


def linear_homogeneous(roots: list[complex], shift: complex) -> Expr:
    """General solution of w'' + c w' + a1 w + a0 = 0 from characteristic roots.

    ``roots`` holds the roots r of r^2 + c r + a1 (one entry when it is a
    double root); ``shift`` is the particular constant -a0/a1 (or the linear
    particular term when a1 = 0 is handled by the caller).
    """
    if len(roots) == 2:
        r1, r2 = roots
        return param("c1") * exp(const(r1) * Z) + param("c2") * exp(const(r2) * Z) + const(shift)
    (r,) = roots
    return (param("c1") + param("c2") * Z) * exp(const(r) * Z) + const(shift)


def riccati_pair(qa, qb, lam_s) -> Expr:
    """Solution of w' = -(w - qa)(w - qb) / lam_s with a pole of residue lam_s at z0.

    For qa != qb it is qb + (qa - qb) / (1 - exp(-(qa - qb)(z - z0) / lam_s)),
    i.e. the quotient of two exponentials; for qa = qb it is lam_s/(z - z0) + qa.
    """
    qa, qb, lam_s = complex(qa), complex(qb), complex(lam_s)
    t = shifted()
    if qa == qb:
        return const(lam_s) * power(t, -1) + const(qa)
    d = qa - qb
    return const(qb) + const(d) * power(const(1) - exp(const(-d / lam_s) * t), -1)


def elliptic_exp_w2(ei, ej, c) -> Expr:
    """(ei - ej) e^{-2cz/5} wp(e^{-cz/5} - zeta0; 0, g3) + ej."""
    ei, ej, c = complex(ei), complex(ej), complex(c)
    inner = exp(const(-c / 5) * Z)
    outer = exp(const(-2 * c / 5) * Z)
    return const(ei - ej) * outer * wp(inner - param("zeta0"), 0, param("g3")) + const(ej)


def elliptic_exp_w6(q_mid, delta, lam_s) -> Expr:
    """q_mid - (delta/2) E wp'(E - zeta0; g2, 0) / wp(E - zeta0; g2, 0), E = e^{-delta z / lam_s}.

    Solves w'' + c w' - (2/lam^2)(w - q_mid + delta)(w - q_mid)(w - q_mid - delta) = 0
    when c * lam_s = 3 delta.
    """
    q_mid, delta, lam_s = complex(q_mid), complex(delta), complex(lam_s)
    e = exp(const(-delta / lam_s) * Z)
    arg = e - param("zeta0")
    g2 = param("g2")
    ratio = wp_prime(arg, g2, 0) * power(wp(arg, g2, 0), -1)
    return const(q_mid) + const(-delta / 2) * e * ratio


def exp_decay_family(c) -> Expr:
    """c1 + c2 e^{-c z}."""
    return param("c1") + param("c2") * exp(const(-complex(c)) * Z)


def add_particular(e: Expr, term: Expr) -> Expr:
    return add(e, term)
