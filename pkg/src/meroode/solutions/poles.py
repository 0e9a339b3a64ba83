"""Poles of closed-form solutions inside a disk |z| < r.

Two independent methods:

LatticeEnumeration
    Every singularity of a supported tree comes from a negative power of a
    base that vanishes, or from a Weierstrass node whose argument hits the
    period lattice. Bases are polynomials in z, exponential polynomials with
    commensurate exponents, or k wp(arg) + b; Weierstrass arguments are
    polynomials in z or k e^{beta z} + b. Candidates are the preimages of the
    relevant lattice translates, enumerated over every lattice point in the
    image of the disk and every logarithm branch with |Im| <= r |beta| + pi.
    The order at each candidate comes from the winding of w - a on a small
    circle (order = max over three values a of minus the winding), which also
    drops removable candidates.

ArgumentPrinciple
    A quadtree over the square [-r, r]^2. For every cell the integrals
    (1/2 pi i) int z^k w'/(w - a) dz, k = 0, 1, 2, are computed by
    Gauss-Legendre on the four edges for three values of a, escalating the
    node count until the k = 0 integral is within 1e-3 of an integer. A cell
    is empty when two of the windings vanish, the third is >= 0, and the
    first and second moments vanish for the zero-winding values of a (a
    cell holding P poles and P a-points would need sum of a-points = sum of
    poles for two values of a at once); it holds a single pole when
    all three windings equal -P with matching first moments and zero
    variance. Anything else is split off-centre.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..config import DEFAULT, Tolerances
from ..errors import CrossCheckFailed, PoleCountingFailed, UnboundParam, UnsupportedShape
from ..weierstrass import context_for
from . import expr as ex

LATTICE = "LatticeEnumeration"
ARGUMENT = "ArgumentPrinciple"

_A_VALUES = (0j, 1.7 + 0.9j, -2.3 + 1.3j)


@dataclass
class PoleInventory:
    disk_radius: float
    poles: list  # [(location, order)], sorted by modulus then argument
    method: str

    def within(self, r: float) -> list:
        return [(p, m) for p, m in self.poles if abs(p) < r]

    def count(self, r: float | None = None, multiplicity: bool = True) -> int:
        poles = self.poles if r is None else self.within(r)
        return sum(m if multiplicity else 1 for _, m in poles)


def _sorted(poles) -> list:
    return sorted(((complex(p), int(m)) for p, m in poles), key=lambda pm: (abs(pm[0]), cmath.phase(pm[0])))


# -- structural analysis ------------------------------------------------------------


def _value(e: ex.Expr, bindings: Mapping) -> complex:
    if isinstance(e, ex.Const):
        return complex(e.value)
    if isinstance(e, ex.Param):
        if e.name not in bindings:
            raise UnboundParam(f"parameter {e.name!r} is not bound")
        return complex(bindings[e.name])
    raise TypeError


def poly_in_z(e: ex.Expr, bindings: Mapping) -> np.ndarray | None:
    """Ascending coefficients if ``e`` is a polynomial in z, else None."""
    if isinstance(e, (ex.Const, ex.Param)):
        return np.array([_value(e, bindings)])
    if isinstance(e, ex.Var):
        return np.array([0j, 1 + 0j])
    if isinstance(e, ex.Add):
        out = np.zeros(1, dtype=complex)
        for a in e.args:
            p = poly_in_z(a, bindings)
            if p is None:
                return None
            n = max(len(out), len(p))
            out = np.pad(out, (0, n - len(out))) + np.pad(p, (0, n - len(p)))
        return out
    if isinstance(e, ex.Mul):
        out = np.array([1 + 0j])
        for a in e.args:
            p = poly_in_z(a, bindings)
            if p is None:
                return None
            out = np.convolve(out, p)
        return out
    if isinstance(e, ex.Pow) and e.n >= 0:
        p = poly_in_z(e.base, bindings)
        if p is None:
            return None
        out = np.array([1 + 0j])
        for _ in range(e.n):
            out = np.convolve(out, p)
        return out
    return None


def rational_in_z(e: ex.Expr, bindings: Mapping) -> tuple[np.ndarray, np.ndarray] | None:
    """(numerator, denominator) ascending coefficients if ``e`` is rational in z, else None."""
    p = poly_in_z(e, bindings)
    if p is not None:
        return p, np.array([1 + 0j])
    if isinstance(e, ex.Add):
        num, den = np.zeros(1, dtype=complex), np.array([1 + 0j])
        for a in e.args:
            r = rational_in_z(a, bindings)
            if r is None:
                return None
            n2, d2 = r
            x, y = np.convolve(num, d2), np.convolve(n2, den)
            n = max(len(x), len(y))
            num = np.pad(x, (0, n - len(x))) + np.pad(y, (0, n - len(y)))
            den = np.convolve(den, d2)
        return num, den
    if isinstance(e, ex.Mul):
        num, den = np.array([1 + 0j]), np.array([1 + 0j])
        for a in e.args:
            r = rational_in_z(a, bindings)
            if r is None:
                return None
            num, den = np.convolve(num, r[0]), np.convolve(den, r[1])
        return num, den
    if isinstance(e, ex.Pow):
        r = rational_in_z(e.base, bindings)
        if r is None:
            return None
        num, den = r if e.n >= 0 else (r[1], r[0])
        out_n, out_d = np.array([1 + 0j]), np.array([1 + 0j])
        for _ in range(abs(e.n)):
            out_n, out_d = np.convolve(out_n, num), np.convolve(out_d, den)
        return out_n, out_d
    return None


def _merge(terms: list, tol: float = 1e-12) -> list:
    out: list = []
    for beta, c in terms:
        for i, (b2, c2) in enumerate(out):
            if abs(beta - b2) <= tol * max(1.0, abs(beta)):
                out[i] = (b2, c2 + c)
                break
        else:
            out.append((beta, c))
    return out


def exp_poly(e: ex.Expr, bindings: Mapping) -> list | None:
    """[(beta, coeff)] if ``e`` = sum coeff e^{beta z}, else None."""
    if isinstance(e, (ex.Const, ex.Param)):
        return [(0j, _value(e, bindings))]
    if isinstance(e, ex.Exp):
        p = poly_in_z(e.arg, bindings)
        if p is None or len(np.trim_zeros(p, "b")) > 2:
            return None
        p = np.pad(p, (0, 2 - len(p))) if len(p) < 2 else p
        return [(complex(p[1]), cmath.exp(p[0]))]
    if isinstance(e, ex.Add):
        out: list = []
        for a in e.args:
            t = exp_poly(a, bindings)
            if t is None:
                return None
            out += t
        return _merge(out)
    if isinstance(e, ex.Mul):
        out = [(0j, 1 + 0j)]
        for a in e.args:
            t = exp_poly(a, bindings)
            if t is None:
                return None
            out = _merge([(b1 + b2, c1 * c2) for b1, c1 in out for b2, c2 in t])
        return out
    if isinstance(e, ex.Pow) and e.n >= 0:
        t = exp_poly(e.base, bindings)
        if t is None:
            return None
        out = [(0j, 1 + 0j)]
        for _ in range(e.n):
            out = _merge([(b1 + b2, c1 * c2) for b1, c1 in out for b2, c2 in t])
        return out
    return None


def _wp_linear(e: ex.Expr, node: ex.Expr, bindings: Mapping) -> tuple | None:
    """(k, b) with e = k * node + b, or None."""
    if e is node:
        return (1 + 0j, 0j)
    if not ex.depends_on_z(e):
        try:
            return (0j, complex(ex._scalar(e, bindings)))
        except UnboundParam:
            raise
    if isinstance(e, ex.Add):
        k = b = 0j
        for a in e.args:
            t = _wp_linear(a, node, bindings)
            if t is None:
                return None
            k, b = k + t[0], b + t[1]
        return (k, b)
    if isinstance(e, ex.Mul):
        k, b = 0j, 1 + 0j
        linear_seen = False
        for a in e.args:
            t = _wp_linear(a, node, bindings)
            if t is None:
                return None
            if t[0] != 0:
                if linear_seen:
                    return None
                linear_seen = True
                k, b = b * t[0], b * t[1]
            else:
                k, b = k * t[1], b * t[1]
        return (k, b)
    return None


# -- lattice helpers ---------------------------------------------------------------


def _lattice_points(ctx, centre: complex, radius: float) -> np.ndarray:
    """Lattice points within ``radius`` of ``centre`` (0 for the rational case)."""
    kind = ctx.kind
    if kind == "rational":
        return np.array([0j]) if abs(centre) <= radius else np.zeros(0, dtype=complex)
    if kind == "trig":
        step = 1j * math.pi / ctx._cache["s"]
        k0 = (centre / step).real
        span = radius / abs(step) + 1
        ks = np.arange(math.floor(k0 - span), math.ceil(k0 + span) + 1)
        pts = ks * step
        return pts[np.abs(pts - centre) <= radius]
    p1, p2 = ctx.periods
    inv = ctx._cache["to_coords"]
    x = inv[0, 0] * centre.real + inv[0, 1] * centre.imag
    y = inv[1, 0] * centre.real + inv[1, 1] * centre.imag
    sx = radius * math.hypot(inv[0, 0], inv[0, 1]) + 1
    sy = radius * math.hypot(inv[1, 0], inv[1, 1]) + 1
    ms = np.arange(math.floor(x - sx), math.ceil(x + sx) + 1)
    ns = np.arange(math.floor(y - sy), math.ceil(y + sy) + 1)
    M, N = np.meshgrid(ms, ns, indexing="ij")
    pts = (M * p1 + N * p2).ravel()
    return pts[np.abs(pts - centre) <= radius]


def _wp_preimages(ctx, value: complex) -> list[complex]:
    """Representatives u with wp(u) = value (one or two per period cell)."""
    kind = ctx.kind
    if kind == "rational":
        if value == 0:
            return []
        u = 1 / cmath.sqrt(value)
        return [u, -u]
    if kind == "trig":
        e, s = ctx._cache["e"], ctx._cache["s"]
        if value == e:
            return []
        u = cmath.asinh(s / cmath.sqrt(value - e)) / s
        return [u, -u]
    from ..briot_bouquet import find_wp_preimage

    u = find_wp_preimage(ctx.inv.g2, ctx.inv.g3, value)
    # value = e_j: u is a half-period and wp - value has a double zero there
    lp = ctx.nearest_lattice_point(2 * u)
    if abs(2 * u - lp) <= 1e-6 * ctx.shortest_period():
        return [lp / 2]
    return [u, -u]


@dataclass
class _ArgMap:
    """Inverse images of the argument map of a Weierstrass node."""

    kind: str  # "poly" or "exp"
    poly: np.ndarray | None = None
    k: complex = 0j
    b: complex = 0j
    beta: complex = 0j

    def image_disk(self, r: float) -> tuple[complex, float]:
        if self.kind == "poly":
            return complex(self.poly[0]), float(sum(abs(c) * r**n for n, c in enumerate(self.poly) if n > 0))
        return self.b, abs(self.k) * math.exp(abs(self.beta) * r)

    def preimages(self, targets: np.ndarray, r: float) -> list[complex]:
        out: list[complex] = []
        if self.kind == "poly":
            p = np.trim_zeros(self.poly, "b")
            if len(p) <= 1:
                return out
            for s in targets:
                q = p.copy()
                q[0] -= s
                out += [complex(z) for z in np.roots(q[::-1]) if abs(z) < r]
            return out
        bound = r * abs(self.beta) + math.pi
        for s in targets:
            x = (s - self.b) / self.k
            if x == 0:
                continue
            out += _log_branches(cmath.log(x), self.beta, r, bound)
        return out


def _log_branches(logx: complex, beta: complex, r: float, bound: float) -> list[complex]:
    """z = (log x + 2 pi i n) / beta with |Im(log x + 2 pi i n)| <= bound and |z| < r."""
    lo = math.ceil((-bound - logx.imag) / (2 * math.pi))
    hi = math.floor((bound - logx.imag) / (2 * math.pi))
    out = []
    for n in range(lo, hi + 1):
        z = (logx + 2j * math.pi * n) / beta
        if abs(z) < r:
            out.append(z)
    return out


def _arg_map(arg: ex.Expr, bindings: Mapping) -> _ArgMap:
    p = poly_in_z(arg, bindings)
    if p is not None:
        return _ArgMap("poly", poly=p)
    t = exp_poly(arg, bindings)
    if t is not None:
        t = [(b, c) for b, c in t if c != 0]
        const = sum((c for b, c in t if abs(b) < 1e-14), 0j)
        rest = [(b, c) for b, c in t if abs(b) >= 1e-14]
        if len(rest) == 1:
            return _ArgMap("exp", k=rest[0][1], b=const, beta=rest[0][0])
    raise UnsupportedShape(f"Weierstrass argument {ex.to_text(arg)} is not a polynomial or k e^(beta z) + b")


def _exp_poly_zeros(terms: list, r: float) -> list[complex]:
    terms = [(b, c) for b, c in terms if abs(c) > 1e-300]
    scale = max(abs(c) for _, c in terms)
    terms = [(b, c) for b, c in terms if abs(c) > 1e-14 * scale]
    nonzero = [b for b, _ in terms if abs(b) > 1e-14]
    if not nonzero:
        return []
    ref = min(nonzero, key=abs)
    fracs = []
    for b, _ in terms:
        ratio = b / ref
        if abs(ratio.imag) > 1e-9 * max(1.0, abs(ratio)):
            raise UnsupportedShape("exponential polynomial with incommensurate exponents")
        f = Fraction(ratio.real).limit_denominator(24)
        if abs(float(f) - ratio.real) > 1e-9 * max(1.0, abs(ratio)):
            raise UnsupportedShape("exponential polynomial with incommensurate exponents")
        fracs.append(f)
    L = math.lcm(*[f.denominator for f in fracs])
    beta0 = ref / L
    ns = [int(f * L) for f in fracs]
    nmin = min(ns)
    coeffs = np.zeros(max(ns) - nmin + 1, dtype=complex)
    for n, (_, c) in zip(ns, terms):
        coeffs[n - nmin] += c
    coeffs = np.trim_zeros(coeffs, "b")
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs[::-1])
    bound = r * abs(beta0) + math.pi
    out = []
    for X in roots:
        if X == 0:
            continue
        out += _log_branches(cmath.log(complex(X)), beta0, r, bound)
    return out


def _candidates(e: ex.Expr, r: float, bindings: Mapping, tols: Tolerances) -> list[complex]:
    out: list[complex] = []
    for node in ex.walk(e):
        if isinstance(node, ex.Exp):
            if _has_singular(node.arg):
                raise UnsupportedShape("exponential of a function with poles")
        elif isinstance(node, ex.Pow) and node.n < 0:
            out += _base_zeros(node.base, r, bindings, tols)
        elif isinstance(node, ex._Weierstrass):
            if _has_singular(node.arg):
                raise UnsupportedShape("Weierstrass function of a function with poles")
            ctx = _ctx(node, bindings, tols)
            amap = _arg_map(node.arg, bindings)
            c, R = amap.image_disk(r)
            out += amap.preimages(_lattice_points(ctx, c, R + 1e-9), r)
    return out


def _has_singular(e: ex.Expr) -> bool:
    return any((isinstance(n, ex.Pow) and n.n < 0) or isinstance(n, ex._Weierstrass) for n in ex.walk(e))


def _ctx(node, bindings, tols):
    g2 = complex(ex._scalar(node.g2, bindings))
    g3 = complex(ex._scalar(node.g3, bindings))
    return context_for(g2, g3, tols)


def _base_zeros(base: ex.Expr, r: float, bindings: Mapping, tols: Tolerances) -> list[complex]:
    p = poly_in_z(base, bindings)
    if p is not None:
        p = np.trim_zeros(p, "b")
        if len(p) <= 1:
            return []
        return [complex(z) for z in np.roots(p[::-1]) if abs(z) < r]
    rat = rational_in_z(base, bindings)
    if rat is not None:
        # zeros of the numerator are candidates only; common factors with the
        # denominator come out with order <= 0 from the winding test and drop
        num = np.trim_zeros(rat[0], "b")
        return [complex(z) for z in np.roots(num[::-1]) if abs(z) < r] if len(num) > 1 else []
    if not _has_singular(base):
        t = exp_poly(base, bindings)
        if t is None:
            raise UnsupportedShape(f"cannot locate the zeros of {ex.to_text(base)}")
        return _exp_poly_zeros(t, r)
    wps = [n for n in ex.walk(base) if isinstance(n, ex.WP)]
    others = [n for n in ex.walk(base) if isinstance(n, ex._Weierstrass) and not isinstance(n, ex.WP)]
    if len(wps) == 1 and not others and not any(isinstance(n, ex.Pow) and n.n < 0 for n in ex.walk(base)):
        node = wps[0]
        lin = _wp_linear(base, node, bindings)
        if lin is not None and lin[0] != 0:
            k, b = lin
            ctx = _ctx(node, bindings, tols)
            amap = _arg_map(node.arg, bindings)
            c, R = amap.image_disk(r)
            targets = []
            for u in _wp_preimages(ctx, -b / k):
                targets.append(u + _lattice_points(ctx, c - u, R + 1e-9))
            if not targets:
                return []
            return amap.preimages(np.concatenate(targets), r)
    raise UnsupportedShape(f"cannot locate the zeros of {ex.to_text(base)}")


# Candidates closer than this (relative to max(1, |z|)) are one point. A root
# of multiplicity m comes back from numpy.roots split by about eps^(1/m), so
# the exact 1e-9 duplicates and the 1e-8 splinters of a double root both merge.
_MERGE_TOL = 1e-6


def _dedupe(points: list[complex]) -> np.ndarray:
    """Merge candidate clusters into their centroids (union-find over close pairs)."""
    arr = np.array(points, dtype=complex)
    n = len(arr)
    if n <= 1:
        return arr
    tree = cKDTree(np.c_[arr.real, arr.imag])
    pairs = np.array(sorted(tree.query_pairs(_MERGE_TOL * max(1.0, float(np.max(np.abs(arr)))))), dtype=int)
    if len(pairs) == 0:
        out = arr
    else:
        graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        k, labels = connected_components(graph, directed=False)
        out = np.array([arr[labels == i].mean() for i in range(k)])
    order = np.lexsort((out.imag, out.real))
    return out[order]


def _winding_orders(e: ex.Expr, cands: np.ndarray, bindings: Mapping, tols: Tolerances) -> np.ndarray:
    """Pole order at each candidate from windings on small circles."""
    n = len(cands)
    if n == 0:
        return np.zeros(0, dtype=int)
    if n > 1:
        tree = cKDTree(np.c_[cands.real, cands.imag])
        d, _ = tree.query(np.c_[cands.real, cands.imag], k=2)
        nn = d[:, 1]
    else:
        nn = np.array([1.0])
    rho = np.minimum(nn / 3, 0.05 * np.maximum(1.0, np.abs(cands)))
    orders = np.zeros(n, dtype=int)
    todo = np.arange(n)
    for M in (64, 512, 4096):
        if len(todo) == 0:
            break
        th = np.exp(2j * np.pi * np.arange(M) / M)
        pts = cands[todo, None] + rho[todo, None] * th[None, :]
        with np.errstate(all="ignore"):
            w = ex.evaluate(e, pts, bindings, tols=tols)
        # w - a winds (zeros of w - a inside) - (pole order) times; a circle that
        # grazes a zero of w - a under-resolves that one value, so each a is
        # judged on its own and at least two cleanly resolved values are needed
        finite = np.all(np.isfinite(w), axis=1)
        usable = np.zeros(len(todo), int)
        best = np.full(len(todo), -(10**9))
        for a in _A_VALUES:
            ang = np.angle(w - a)
            step = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
            step = (step + np.pi) % (2 * np.pi) - np.pi
            good = finite & (np.max(np.abs(step), axis=1) <= np.pi / 2)
            wind = np.rint(step.sum(axis=1) / (2 * np.pi)).astype(int)
            best = np.where(good, np.maximum(best, -wind), best)
            usable += good
        orders[todo] = best
        todo = todo[usable < 2]
    if len(todo):
        raise PoleCountingFailed(f"winding around {len(todo)} candidate(s) did not resolve")
    return orders


def lattice_enumeration(e: ex.Expr, r: float, bindings: Mapping | None = None, *, tols: Tolerances = DEFAULT) -> PoleInventory:
    bindings = dict(bindings or {})
    pad = 1e-6 * max(1.0, r)
    cands = _dedupe(_candidates(e, r + pad, bindings, tols))
    orders = _winding_orders(e, cands, bindings, tols)
    poles = [(z, m) for z, m in zip(cands, orders) if m > 0 and abs(z) < r]
    return PoleInventory(float(r), _sorted(poles), LATTICE)


# -- argument principle ---------------------------------------------------------------


@dataclass(frozen=True)
class ArgumentConfig:
    initial_cell: float = 1.0
    nodes: tuple = (16, 32, 64, 128, 256)
    integer_tol: float = 1e-3
    moment_tol: float = 1e-3
    max_depth: int = 60
    split: float = 0.4813  # off-centre split keeps edges away from symmetric pole sets


@lru_cache(maxsize=None)
def _gl(n: int):
    x, wts = np.polynomial.legendre.leggauss(n)
    return x, wts


def _cell_nodes(cells: np.ndarray, n: int):
    """Nodes and weights (dz) on the four edges of each cell, counter-clockwise."""
    x, wts = _gl(n)
    t = (x + 1) / 2
    x0, x1, y0, y1 = cells.T
    corners = [
        (x0 + 1j * y0, x1 + 1j * y0),
        (x1 + 1j * y0, x1 + 1j * y1),
        (x1 + 1j * y1, x0 + 1j * y1),
        (x0 + 1j * y1, x0 + 1j * y0),
    ]
    zs, dz = [], []
    for a, b in corners:
        zs.append(a[:, None] + (b - a)[:, None] * t[None, :])
        dz.append((b - a)[:, None] * (wts / 2)[None, :])
    return np.concatenate(zs, axis=1), np.concatenate(dz, axis=1)


def _moments(w, dw, z, dz, centre):
    """(3 a-values, 3 moments) integrals (1/2 pi i) int (z - centre)^k w'/(w - a) dz.

    Moments about the cell centre keep the variance test free of cancellation.
    """
    z = z - centre[:, None]
    out = np.zeros((len(z), len(_A_VALUES), 3), dtype=complex)
    for i, a in enumerate(_A_VALUES):
        with np.errstate(all="ignore"):
            f = dw / (w - a)
        for k in range(3):
            out[:, i, k] = np.sum(f * z**k * dz, axis=1) / (2j * np.pi)
    return out


def argument_principle(
    e: ex.Expr,
    r: float,
    bindings: Mapping | None = None,
    *,
    config: ArgumentConfig = ArgumentConfig(),
    tols: Tolerances = DEFAULT,
) -> PoleInventory:
    bindings = dict(bindings or {})
    de = e.diff()
    lo, hi = -r * 1.0001 - 0.00731, r * 1.0001 + 0.00519
    ncell = max(1, math.ceil((hi - lo) / config.initial_cell))
    edges = np.linspace(lo, hi, ncell + 1)
    # queue entries: (cell, node level, depth, moments at config.nodes[level] or None)
    queue = [((edges[i], edges[i + 1], edges[j], edges[j + 1]), 0, 0, None) for i in range(ncell) for j in range(ncell)]
    top = len(config.nodes) - 1
    poles: list = []

    def moments_at(cells: np.ndarray, n: int):
        z, dz = _cell_nodes(cells, n)
        centres = (cells[:, 0] + cells[:, 1]) / 2 + 1j * (cells[:, 2] + cells[:, 3]) / 2
        with np.errstate(all="ignore"):
            w, dw = ex.evaluate_many([e, de], z, bindings, tols=tols)
        return _moments(w, dw, z, dz, centres)

    while queue:
        queue = [q for q in queue if _meets_disk(q[0], r)]
        if not queue:
            break
        if max(q[2] for q in queue) > config.max_depth:
            raise PoleCountingFailed("argument-principle subdivision exceeded the depth limit")
        nxt: list = []
        for lvl in sorted({q[1] for q in queue}):
            batch = [q for q in queue if q[1] == lvl]
            cells = np.array([q[0] for q in batch], dtype=float)
            fresh = [k for k, q in enumerate(batch) if q[3] is None]
            m1 = np.zeros((len(batch), len(_A_VALUES), 3), dtype=complex)
            if fresh:
                m1[fresh] = moments_at(cells[fresh], config.nodes[lvl])
            for k, q in enumerate(batch):
                if q[3] is not None:
                    m1[k] = q[3]
            m2 = moments_at(cells, config.nodes[min(lvl + 1, top)])
            I0a, I0b = m1[:, :, 0], m2[:, :, 0]
            conv = (
                np.all(np.isfinite(m1), axis=(1, 2))
                & np.all(np.isfinite(m2), axis=(1, 2))
                & np.all(np.abs(I0b - np.rint(I0b.real)) < config.integer_tol, axis=1)
                & np.all(np.abs(I0a - I0b) < config.integer_tol, axis=1)
            )
            for j, (cell, _, depth, _) in enumerate(batch):
                if not conv[j]:
                    if lvl + 1 < top:
                        nxt.append((cell, lvl + 1, depth, m2[j]))
                    else:
                        nxt += [(c, 0, depth + 1, None) for c in _split(cell, config.split)]
                    continue
                verdict = _classify_cell(cell, np.rint(I0b[j].real).astype(int), m2[j], config)
                if verdict is None:
                    continue
                if isinstance(verdict, tuple):
                    poles.append(verdict)
                    continue
                nxt += [(c, 0, depth + 1, None) for c in _split(cell, config.split)]
        queue = nxt
    poles = [(p, m) for p, m in poles if abs(p) < r]
    return PoleInventory(float(r), _sorted(poles), ARGUMENT)


def _meets_disk(cell, r: float) -> bool:
    x0, x1, y0, y1 = cell
    dx = max(0.0, x0, -x1)
    dy = max(0.0, y0, -y1)
    return dx * dx + dy * dy < r * r


def _classify_cell(cell, W: np.ndarray, mom: np.ndarray, config: ArgumentConfig):
    """None for an empty cell, (location, order) for an isolated pole, "split" otherwise."""
    x0, x1, y0, y1 = cell
    zero_a = np.nonzero(W == 0)[0]
    h = max(x1 - x0, y1 - y0)
    if (
        len(zero_a) >= 2
        and np.all(W >= 0)
        and np.all(np.abs(mom[zero_a, 1]) <= config.moment_tol * h)
        and np.all(np.abs(mom[zero_a, 2]) <= config.moment_tol * h * h)
    ):
        return None
    if np.all(W == W[0]) and W[0] < 0:
        P = -int(W[0])
        mean = -mom[:, 1] / P
        var = -mom[:, 2] / P - mean**2
        loc = complex(mean[0]) + complex((x0 + x1) / 2, (y0 + y1) / 2)
        if (
            np.all(np.abs(var) <= 1e-6 * h * h)
            and np.all(np.abs(mean - mean[0]) <= 1e-6 * h)
            and x0 - 1e-9 <= loc.real <= x1 + 1e-9
            and y0 - 1e-9 <= loc.imag <= y1 + 1e-9
        ):
            return (loc, P)
    return "split"


def _split(cell, frac: float):
    x0, x1, y0, y1 = cell
    xm = x0 + frac * (x1 - x0)
    ym = y0 + (1 - frac) * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


# -- public entry point ------------------------------------------------------------------


def compare_inventories(a: PoleInventory, b: PoleInventory, loc_tol: float = 1e-6) -> tuple[bool, float]:
    """(same orders at matched locations, largest location mismatch)."""
    if len(a.poles) != len(b.poles):
        return False, math.inf
    if not a.poles:
        return True, 0.0
    bl = np.array([p for p, _ in b.poles])
    used = np.zeros(len(bl), bool)
    worst = 0.0
    for p, m in a.poles:
        d = np.abs(bl - p)
        d[used] = np.inf
        k = int(np.argmin(d))
        if d[k] > loc_tol * max(1.0, abs(p)) or b.poles[k][1] != m:
            return False, float(d[k])
        used[k] = True
        worst = max(worst, float(d[k]))
    return True, worst


def poles_in_disk(
    e: ex.Expr,
    r: float,
    method: str = "lattice",
    bindings: Mapping | None = None,
    *,
    tols: Tolerances = DEFAULT,
) -> PoleInventory:
    """Poles of ``e`` in |z| < r with their orders.

    ``method`` is "lattice", "argument" or "both"; "both" runs the two
    methods, raises :class:`CrossCheckFailed` if their inventories differ,
    and returns the lattice inventory.
    """
    if r <= 0:
        return PoleInventory(float(r), [], LATTICE)
    if method == "lattice":
        return lattice_enumeration(e, r, bindings, tols=tols)
    if method == "argument":
        return argument_principle(e, r, bindings, tols=tols)
    if method == "both":
        a = lattice_enumeration(e, r, bindings, tols=tols)
        b = argument_principle(e, r, bindings, tols=tols)
        ok, worst = compare_inventories(a, b)
        if not ok:
            raise CrossCheckFailed(
                f"lattice enumeration found {a.count()} poles (with multiplicity), "
                f"argument principle found {b.count()} (location mismatch {worst:.3g})"
            )
        return a
    raise ValueError(f"unknown pole method {method!r}")
