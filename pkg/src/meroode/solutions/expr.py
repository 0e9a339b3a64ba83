"""Expression trees for closed-form solutions.

Node kinds: constants, the variable z, named free parameters, n-ary sums and
products, integer powers, exponentials, and the Weierstrass functions
wp / wp' / zeta with an arbitrary inner argument and invariant subtrees.
Differentiation is exact and closed over the node set:

    d wp(f)   = wp'(f) f'
    d wp'(f)  = (6 wp(f)^2 - g2 / 2) f'
    d zeta(f) = -wp(f) f'

Nodes are immutable and compared by identity; the smart constructors
(:func:`add`, :func:`mul`, :func:`power`, ...) fold constants so derivative
trees stay small.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from ..config import DEFAULT, Tolerances
from ..errors import AtPole, UnboundParam
from ..weierstrass import context_for


class Expr:
    __slots__ = ("_deriv",)

    def __init__(self):
        self._deriv = None

    # -- operator sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, lift(other))

    def __radd__(self, other):
        return add(lift(other), self)

    def __sub__(self, other):
        return add(self, neg(lift(other)))

    def __rsub__(self, other):
        return add(lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, lift(other))

    def __rmul__(self, other):
        return mul(lift(other), self)

    def __truediv__(self, other):
        return mul(self, power(lift(other), -1))

    def __rtruediv__(self, other):
        return mul(lift(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        return power(self, n)

    # -- structure --------------------------------------------------------
    def children(self) -> tuple["Expr", ...]:
        return ()

    def diff(self) -> "Expr":
        if self._deriv is None:
            self._deriv = self._diff()
        return self._deriv

    def _diff(self) -> "Expr":  # pragma: no cover - abstract
        raise NotImplementedError

    def __repr__(self):
        return to_text(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = value  # complex, int or Fraction

    def _diff(self):
        return ZERO


class Var(Expr):
    __slots__ = ()

    def _diff(self):
        return ONE


class Param(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def _diff(self):
        return ZERO


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        super().__init__()
        self.args = args

    def children(self):
        return self.args

    def _diff(self):
        return add(*(a.diff() for a in self.args))


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args: tuple):
        super().__init__()
        self.args = args

    def children(self):
        return self.args

    def _diff(self):
        terms = []
        for i, a in enumerate(self.args):
            da = a.diff()
            if is_zero(da):
                continue
            terms.append(mul(*self.args[:i], da, *self.args[i + 1 :]))
        return add(*terms)


class Pow(Expr):
    __slots__ = ("base", "n")

    def __init__(self, base: Expr, n: int):
        super().__init__()
        self.base = base
        self.n = n

    def children(self):
        return (self.base,)

    def _diff(self):
        return mul(Const(self.n), power(self.base, self.n - 1), self.base.diff())


class Exp(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        super().__init__()
        self.arg = arg

    def children(self):
        return (self.arg,)

    def _diff(self):
        return mul(self, self.arg.diff())


class _Weierstrass(Expr):
    __slots__ = ("arg", "g2", "g3")
    kind = ""

    def __init__(self, arg: Expr, g2: Expr, g3: Expr):
        super().__init__()
        if depends_on_z(g2) or depends_on_z(g3):
            raise ValueError("Weierstrass invariants must not depend on z")
        self.arg = arg
        self.g2 = g2
        self.g3 = g3

    def children(self):
        return (self.arg, self.g2, self.g3)


class WP(_Weierstrass):
    __slots__ = ()
    kind = "wp"

    def _diff(self):
        return mul(WPPrime(self.arg, self.g2, self.g3), self.arg.diff())


class WPPrime(_Weierstrass):
    __slots__ = ()
    kind = "wpp"

    def _diff(self):
        p = WP(self.arg, self.g2, self.g3)
        second = add(mul(Const(6), power(p, 2)), mul(Const(Fraction(-1, 2)), self.g2))
        return mul(second, self.arg.diff())


class WZeta(_Weierstrass):
    __slots__ = ()
    kind = "zeta"

    def _diff(self):
        return mul(Const(-1), WP(self.arg, self.g2, self.g3), self.arg.diff())


ZERO = Const(0)
ONE = Const(1)
Z = Var()


# -- smart constructors -----------------------------------------------------


def lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, (float, complex, np.number)):
        return Const(complex(x))
    raise TypeError(f"cannot lift {type(x).__name__} into an expression")


def const(x) -> Const:
    return lift(x) if isinstance(x, Expr) else Const(x if isinstance(x, (int, Fraction)) else complex(x))


def param(name: str) -> Param:
    return Param(name)


def is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1


def add(*args: Expr) -> Expr:
    flat: list[Expr] = []
    total = 0
    for a in args:
        a = lift(a)
        parts = a.args if isinstance(a, Add) else (a,)
        for p in parts:
            if isinstance(p, Const):
                total = total + p.value
            else:
                flat.append(p)
    if total != 0:
        flat.append(Const(total))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*args: Expr) -> Expr:
    flat: list[Expr] = []
    coef = 1
    for a in args:
        a = lift(a)
        parts = a.args if isinstance(a, Mul) else (a,)
        for p in parts:
            if isinstance(p, Const):
                coef = coef * p.value
            else:
                flat.append(p)
    if coef == 0:
        return ZERO
    if coef != 1:
        flat.insert(0, Const(coef))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def power(base: Expr, n: int) -> Expr:
    if int(n) != n:
        raise ValueError("only integer powers are supported")
    n = int(n)
    base = lift(base)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        v = base.value
        if isinstance(v, (int, Fraction)):
            return Const(Fraction(v) ** n if n < 0 else v**n)
        return Const(complex(v) ** n)
    if isinstance(base, Pow):
        return power(base.base, base.n * n)
    return Pow(base, n)


def exp(arg) -> Expr:
    arg = lift(arg)
    if is_zero(arg):
        return ONE
    if isinstance(arg, Const):
        return Const(cmath.exp(complex(arg.value)))
    return Exp(arg)


def wp(arg, g2, g3) -> WP:
    return WP(lift(arg), lift(g2), lift(g3))


def wp_prime(arg, g2, g3) -> WPPrime:
    return WPPrime(lift(arg), lift(g2), lift(g3))


def wzeta(arg, g2, g3) -> WZeta:
    return WZeta(lift(arg), lift(g2), lift(g3))


def cosh(arg) -> Expr:
    arg = lift(arg)
    return mul(Const(Fraction(1, 2)), add(exp(arg), exp(neg(arg))))


def sinh(arg) -> Expr:
    arg = lift(arg)
    return mul(Const(Fraction(1, 2)), add(exp(arg), neg(exp(neg(arg)))))


def coth(arg) -> Expr:
    e2 = exp(mul(Const(2), lift(arg)))
    return mul(add(e2, ONE), power(add(e2, Const(-1)), -1))


def sin(arg) -> Expr:
    ia = mul(Const(1j), lift(arg))
    return mul(Const(-0.5j), add(exp(ia), neg(exp(neg(ia)))))


def cos(arg) -> Expr:
    ia = mul(Const(1j), lift(arg))
    return mul(Const(Fraction(1, 2)), add(exp(ia), exp(neg(ia))))


# -- traversal ---------------------------------------------------------------


def walk(e: Expr) -> Iterable[Expr]:
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.children())


def params_of(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Param)}


def depends_on_z(e: Expr) -> bool:
    return any(isinstance(n, Var) for n in walk(e))


def substitute(e: Expr, *, z: Expr | None = None, params: Mapping[str, object] | None = None) -> Expr:
    """Replace the variable by ``z`` and/or parameters by values or subtrees."""
    params = params or {}
    memo: dict[int, Expr] = {}

    def go(n: Expr) -> Expr:
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Var):
            out = z if z is not None else n
        elif isinstance(n, Param):
            out = lift(params[n.name]) if n.name in params else n
        elif isinstance(n, Const):
            out = n
        elif isinstance(n, Add):
            out = add(*(go(a) for a in n.args))
        elif isinstance(n, Mul):
            out = mul(*(go(a) for a in n.args))
        elif isinstance(n, Pow):
            out = power(go(n.base), n.n)
        elif isinstance(n, Exp):
            out = exp(go(n.arg))
        elif isinstance(n, _Weierstrass):
            out = type(n)(go(n.arg), go(n.g2), go(n.g3))
        else:  # pragma: no cover
            raise TypeError(type(n))
        memo[key] = out
        return out

    return go(e)


def bind(e: Expr, bindings: Mapping[str, object]) -> Expr:
    return substitute(e, params=bindings)


# -- numeric evaluation ------------------------------------------------------


def _scalar(e: Expr, bindings: Mapping[str, complex]) -> complex:
    return complex(np.asarray(evaluate(e, np.zeros(1, dtype=complex), bindings))[0])


def evaluate(
    e: Expr,
    z,
    bindings: Mapping[str, complex] | None = None,
    *,
    tols: Tolerances = DEFAULT,
    check_poles: bool = False,
):
    """Vectorised value of ``e`` at the points ``z``.

    With ``check_poles`` every Weierstrass argument is tested against the
    pole-proximity threshold and every negative power against an exact or
    numerically negligible zero base; violations raise :class:`AtPole`.
    """
    return evaluate_many([e], z, bindings, tols=tols, check_poles=check_poles)[0]


def evaluate_many(
    exprs,
    z,
    bindings: Mapping[str, complex] | None = None,
    *,
    tols: Tolerances = DEFAULT,
    check_poles: bool = False,
) -> list[np.ndarray]:
    """:func:`evaluate` for several trees sharing one memo (e.g. w and w')."""
    bindings = bindings or {}
    z = np.asarray(z, dtype=complex)
    memo: dict[int, np.ndarray] = {}
    wctx: dict[int, object] = {}
    needs_zeta = {id(n.arg) for e in exprs for n in walk(e) if isinstance(n, WZeta)}

    def go(n: Expr):
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Const):
            out = complex(n.value)
        elif isinstance(n, Var):
            out = z
        elif isinstance(n, Param):
            if n.name not in bindings:
                raise UnboundParam(f"parameter {n.name!r} is not bound")
            out = complex(bindings[n.name])
        elif isinstance(n, Add):
            out = go(n.args[0])
            for a in n.args[1:]:
                out = out + go(a)
        elif isinstance(n, Mul):
            out = go(n.args[0])
            for a in n.args[1:]:
                out = out * go(a)
        elif isinstance(n, Pow):
            b = go(n.base)
            if n.n < 0 and check_poles:
                bb = np.asarray(b)
                if np.any(bb == 0) or not np.all(np.isfinite(bb)):
                    raise AtPole("negative power of a vanishing factor")
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                out = b ** n.n if n.n > 0 else 1.0 / (b ** (-n.n))
        elif isinstance(n, Exp):
            with np.errstate(over="ignore", invalid="ignore"):
                out = np.exp(go(n.arg))
        elif isinstance(n, _Weierstrass):
            out = _eval_weierstrass(n, go, bindings, tols, check_poles, wctx, needs_zeta)
        else:  # pragma: no cover
            raise TypeError(type(n))
        memo[key] = out
        return out

    return [np.broadcast_to(np.asarray(go(e), dtype=complex), z.shape).copy() for e in exprs]


def _eval_weierstrass(n, go, bindings, tols, check_poles, wctx, needs_zeta):
    g2 = complex(np.asarray(go(n.g2)).ravel()[0])
    g3 = complex(np.asarray(go(n.g3)).ravel()[0])
    ctx = context_for(g2, g3, tols)
    arg = np.asarray(go(n.arg), dtype=complex)
    if check_poles:
        for a in np.atleast_1d(arg).ravel():
            ctx.check_pole(complex(a))
    key = (id(n.arg), g2, g3)
    if key not in wctx:
        wctx[key] = ctx.evaluate(arg, want_zeta=id(n.arg) in needs_zeta)
    p, dp, zt = wctx[key]
    if isinstance(n, WP):
        return p
    if isinstance(n, WPPrime):
        return dp
    return zt


def derivative(e: Expr, order: int) -> Expr:
    out = e
    for _ in range(order):
        out = out.diff()
    return out


def eval_jet(
    e: Expr,
    z,
    order: int,
    bindings: Mapping[str, complex] | None = None,
    *,
    tols: Tolerances = DEFAULT,
) -> list[complex]:
    """(w, w', ..., w^(order)) at a single point by exact tree differentiation."""
    z = complex(z)
    missing = params_of(e) - set(bindings or {})
    if missing:
        raise UnboundParam(f"unbound parameters: {sorted(missing)}")
    out = []
    d = e
    for k in range(order + 1):
        v = complex(evaluate(d, np.array([z]), bindings, tols=tols, check_poles=True)[0])
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise AtPole(f"non-finite derivative of order {k} at {z}")
        out.append(v)
        if k < order:
            d = d.diff()
    return out


def jet_arrays(e: Expr, z, order: int, bindings=None, *, tols: Tolerances = DEFAULT) -> list[np.ndarray]:
    """Vectorised jet without pole checks (non-finite entries mark poles)."""
    ds = [e]
    for _ in range(order):
        ds.append(ds[-1].diff())
    return evaluate_many(ds, z, bindings, tols=tols)


def as_function(e: Expr, bindings=None, *, tols: Tolerances = DEFAULT) -> Callable:
    return lambda z: evaluate(e, z, bindings, tols=tols)


# -- text rendering (for reports and debugging) ----------------------------


def _fmt_const(v) -> str:
    if isinstance(v, (int, Fraction)):
        return str(v)
    v = complex(v)
    if v.imag == 0:
        return format(v.real, ".12g")
    return f"({format(v.real, '.12g')}{v.imag:+.12g}j)"


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return "z"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Add):
        return "(" + " + ".join(to_text(a) for a in e.args) + ")"
    if isinstance(e, Mul):
        return "*".join(to_text(a) for a in e.args)
    if isinstance(e, Pow):
        return f"({to_text(e.base)})^{e.n}"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, _Weierstrass):
        return f"{e.kind}({to_text(e.arg)}; {to_text(e.g2)}, {to_text(e.g3)})"
    return object.__repr__(e)  # pragma: no cover
