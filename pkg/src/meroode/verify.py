"""Numerical verification: ODE residuals, Nevanlinna characteristic, growth fits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import SamplingExhausted
from .ode import OdeSpec
from .solutions import expr as ex
from .solutions.poles import PoleInventory, poles_in_disk


@dataclass(frozen=True)
class SamplingConfig:
    """Where residual samples are drawn.

    Points are uniform in the disk |z - center| < radius. A point is rejected
    as pole-near when |w| exceeds ``pole_magnitude`` (a pole of order m at
    distance d gives |w| ~ d^-m, so this is a safety radius in disguise) or
    when any jet entry is non-finite.
    """

    n_points: int = 32
    radius: float = 1.5
    center: complex = 0j
    seed: int = 0
    pole_magnitude: float = 1e6
    max_attempts: int = 20


@dataclass
class ResidualReport:
    max_relative_residual: float
    samples: list  # (z, relative residual)
    skipped_near_poles: int


def _relative_residual(ode: OdeSpec, w, dw, d2w) -> np.ndarray:
    # exact (Fraction) coefficients would turn the arrays into object arrays
    terms = [complex(c) * w**i0 * dw**i1 * d2w**i2 for c, (i0, i1, i2) in ode.monomials()]
    total = sum(terms)
    scale = np.max(np.abs(np.array([np.broadcast_to(t, np.shape(w)) for t in terms])), axis=0)
    return np.abs(total) / np.maximum(scale, 1e-300)


def residual_max(
    ode: OdeSpec,
    expr: ex.Expr,
    bindings: Mapping | None = None,
    sampling: SamplingConfig = SamplingConfig(),
    *,
    tols: Tolerances = DEFAULT,
) -> ResidualReport:
    """Largest relative residual of the ODE at random sample points.

    The residual at z is |F(z, w, w', w'')| divided by the largest single
    term magnitude of F, so it is scale free. Derivatives come from exact
    tree differentiation.
    """
    bindings = dict(bindings or {})
    rng = np.random.default_rng(sampling.seed)
    kept_z: list[complex] = []
    kept_r: list[float] = []
    skipped = 0
    d1 = expr.diff()
    d2 = d1.diff()
    for _ in range(sampling.max_attempts):
        need = sampling.n_points - len(kept_z)
        if need <= 0:
            break
        m = 2 * need
        rad = sampling.radius * np.sqrt(rng.uniform(size=m))
        ang = rng.uniform(0, 2 * np.pi, size=m)
        z = sampling.center + rad * np.exp(1j * ang)
        with np.errstate(all="ignore"):
            w = ex.evaluate(expr, z, bindings, tols=tols)
            dw = ex.evaluate(d1, z, bindings, tols=tols)
            d2w = ex.evaluate(d2, z, bindings, tols=tols)
            ok = np.isfinite(w) & np.isfinite(dw) & np.isfinite(d2w) & (np.abs(w) < sampling.pole_magnitude)
            res = _relative_residual(ode, w, dw, d2w)
        ok &= np.isfinite(res)
        skipped += int(np.count_nonzero(~ok))
        for zi, ri in zip(z[ok][:need], res[ok][:need]):
            kept_z.append(complex(zi))
            kept_r.append(float(ri))
    if not kept_z:
        raise SamplingExhausted("every sample point was rejected as pole-near")
    return ResidualReport(max(kept_r), list(zip(kept_z, kept_r)), skipped)


# -- Nevanlinna characteristic ---------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    initial_points: int = 512
    max_points: int = 2**18
    rel_tol: float = 1e-6
    abs_tol: float = 1e-8
    pole_shift: float = 1e-6
    pole_method: str = "lattice"
    count_multiplicity: bool = True


@dataclass
class CharacteristicSample:
    r: float
    m: float
    N: float
    T: float
    refinements: int = 0
    r_used: float = 0.0
    converged: bool = True


def proximity_m(expr: ex.Expr, r: float, bindings: Mapping | None = None, quad: QuadratureConfig = QuadratureConfig()):
    """(1/2pi) int log+ |w(r e^{i theta})| d theta by nested trapezoid doubling.

    Returns (m, number of doublings, converged flag).
    """
    bindings = dict(bindings or {})

    def values(n: int, offset: bool) -> np.ndarray:
        th = (np.arange(n) + (0.5 if offset else 0.0)) * (2 * np.pi / n)
        with np.errstate(all="ignore"):
            w = ex.evaluate(expr, r * np.exp(1j * th), bindings)
            out = np.log(np.maximum(np.abs(w), 1.0))
        out[~np.isfinite(out)] = 0.0
        return out

    n = quad.initial_points
    acc = values(n, False).sum()
    est = acc / n
    k = 0
    while 2 * n <= quad.max_points:
        acc = acc + values(n, True).sum()
        n *= 2
        new = acc / n
        k += 1
        if abs(new - est) <= max(quad.rel_tol * abs(new), quad.abs_tol):
            return new, k, True
        est = new
    return est, k, False


def counting_N(inventory: PoleInventory, r: float, count_multiplicity: bool = True) -> float:
    """N(r) = n(0) log r + sum_{0 < |p| < r} mult * log(r / |p|)."""
    total = 0.0
    for loc, order in inventory.poles:
        mult = order if count_multiplicity else 1
        d = abs(loc)
        if d >= r:
            continue
        if d == 0:
            total += mult * math.log(r)
        else:
            total += mult * math.log(r / d)
    return total


def _on_circle(inv: PoleInventory, r: float, eps: float) -> bool:
    return any(abs(abs(p) - r) < eps for p, _ in inv.poles)


def characteristic_T(
    expr: ex.Expr,
    r: float,
    quad: QuadratureConfig = QuadratureConfig(),
    bindings: Mapping | None = None,
    *,
    inventory: PoleInventory | None = None,
) -> CharacteristicSample:
    """m(r), N(r) and T = m + N for an expression of a supported pole shape."""
    bindings = dict(bindings or {})
    inv = inventory
    if inv is None or inv.disk_radius < r + 2 * quad.pole_shift:
        inv = poles_in_disk(expr, r + 2 * quad.pole_shift, method=quad.pole_method, bindings=bindings)
    r_used = r
    while _on_circle(inv, r_used, 1e-9 * max(1.0, r)):
        r_used += quad.pole_shift
    m, k, ok = proximity_m(expr, r_used, bindings, quad)
    N = counting_N(inv, r_used, quad.count_multiplicity)
    return CharacteristicSample(r, float(m), float(N), float(m + N), k, r_used, ok)


@dataclass
class GrowthEstimate:
    samples: list  # CharacteristicSample
    fitted: tuple  # (a, b, c, n) for T(r) <= a * exp_{n-1}(b r^c)
    order_estimate: float
    residuals: dict = field(default_factory=dict)  # n -> rms misfit of the log-domain regression

    def bound(self, r) -> np.ndarray:
        a, b, c, n = self.fitted
        r = np.asarray(r, dtype=float)
        return a * np.exp(b * r**c) if n == 2 else a * r**b

    def dominates(self) -> bool:
        rs = np.array([s.r for s in self.samples])
        Ts = np.array([s.T for s in self.samples])
        return bool(np.all(self.bound(rs) >= Ts * (1 - 1e-12)))

    def to_csv(self) -> str:
        return samples_to_csv(self.samples)


def samples_to_csv(samples: Sequence[CharacteristicSample]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["r", "m", "N", "T"])
    for s in samples:
        wr.writerow([format(v, ".17g") for v in (s.r, s.m, s.N, s.T)])
    return buf.getvalue()


def _fit_log_linear(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least squares y ~ alpha + beta x; returns (alpha inflated to dominate, beta, rms)."""
    A = np.vstack([np.ones_like(x), x]).T
    (alpha, beta), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (alpha + beta * x)
    rms = float(np.sqrt(np.mean(resid**2)))
    alpha = alpha + max(0.0, float(np.max(resid)))
    return float(alpha), float(beta), rms


def growth_bound_fit(
    expr: ex.Expr,
    r_grid: Sequence[float],
    bindings: Mapping | None = None,
    quad: QuadratureConfig = QuadratureConfig(),
    *,
    samples: Sequence[CharacteristicSample] | None = None,
) -> GrowthEstimate:
    """Fit T(r) <= a exp_{n-1}(b r^c), c = 1, for the smaller adequate n.

    n = 1 means a power bound a r^b (finite order b); n = 2 means a e^{b r}.
    Both log-domain regressions are run; n = 1 is chosen unless the n = 2
    regression has a clearly smaller misfit (by a factor 2), since the
    conjecture asks for the smallest n. Constants are then inflated so the
    bound dominates every sample.
    """
    bindings = dict(bindings or {})
    r_grid = [float(r) for r in r_grid]
    if samples is None:
        inv = poles_in_disk(expr, max(r_grid) + 1e-3, method=quad.pole_method, bindings=bindings)
        samples = [characteristic_T(expr, r, quad, bindings, inventory=inv) for r in r_grid]
    rs = np.array([s.r for s in samples])
    Ts = np.array([max(s.T, 1e-300) for s in samples])
    logT = np.log(Ts)
    lr = np.log(rs)
    # n = 1: log T ~ log a + b log r
    a1, b1, rms1 = _fit_log_linear(lr, logT)
    # n = 2: log T ~ log a + b r
    a2, b2, rms2 = _fit_log_linear(rs, logT)
    if rms2 * 2 < rms1:
        fitted = (math.exp(a2), b2, 1.0, 2)
        order = math.inf
    else:
        fitted = (math.exp(a1), b1, 1.0, 1)
        # slope of log T against log r; the raw ratio log T / log r carries a
        # log(a) / log r bias that vanishes only as r -> infinity
        order = max(b1, 0.0)
    return GrowthEstimate(list(samples), fitted, order, {1: rms1, 2: rms2})
