import numpy as np
import pytest

from meroode.errors import AtPole
from meroode.numerics import EllipticInvariants, lattice_periods
from meroode.weierstrass import context_for, wp_eval, zeta_eval

INVARIANTS = [(4, 0), (1.3 - 0.4j, 0.7 + 0.2j), (12, 8 + 1e-3), (-2 + 1j, 0.5)]


def _cell_points(g2, g3, rng, n, keep_off=0.05):
    b = lattice_periods(EllipticInvariants(g2, g3))
    s, t = rng.uniform(-1, 1, size=(2, n))
    z = s * b.omega1 + t * b.omega2
    ctx = context_for(g2, g3)
    far = np.array([abs(x - ctx.nearest_lattice_point(x)) > keep_off for x in z])
    return z[far]


def test_leading_term_near_origin():
    ctx = context_for(4, 0)
    p, _ = wp_eval(ctx, 1e-3)
    assert abs(1e-6 * p - 1) < 1e-5
    assert abs(1e-3 * zeta_eval(ctx, 1e-3) - 1) < 1e-5


def test_value_at_half_period():
    ctx = context_for(4, 0)
    w1 = lattice_periods(EllipticInvariants(4, 0)).omega1
    p, dp = wp_eval(ctx, w1)
    assert abs(p - 1) < 1e-8
    assert abs(dp) < 1e-6


def test_pole_raises_with_location():
    ctx = context_for(4, 0)
    w1 = lattice_periods(EllipticInvariants(4, 0)).omega1
    with pytest.raises(AtPole) as info:
        wp_eval(ctx, 2 * w1 + 1e-9)
    assert abs(info.value.location - 2 * w1) < 1e-9


@pytest.mark.parametrize("g2,g3", INVARIANTS)
def test_differential_identity(g2, g3, rng):
    ctx = context_for(g2, g3)
    z = _cell_points(g2, g3, rng, 220)[:200]
    p, dp, _ = ctx.evaluate(z)
    lhs = dp**2
    rhs = 4 * p**3 - g2 * p - g3
    assert np.max(np.abs(lhs - rhs) / (1 + np.abs(p) ** 3)) < 1e-9


@pytest.mark.parametrize("g2,g3", INVARIANTS)
def test_parity(g2, g3, rng):
    ctx = context_for(g2, g3)
    z = _cell_points(g2, g3, rng, 40)
    p, dp, zt = ctx.evaluate(z, want_zeta=True)
    pm, dpm, ztm = ctx.evaluate(-z, want_zeta=True)
    assert np.allclose(p, pm, rtol=1e-10)
    assert np.allclose(dp, -dpm, rtol=1e-10)
    assert np.allclose(zt, -ztm, rtol=1e-10)


@pytest.mark.parametrize("g2,g3", INVARIANTS)
def test_second_derivative_identity(g2, g3, rng):
    ctx = context_for(g2, g3)
    # finite differences lose accuracy next to a pole, for reasons unrelated to wp;
    # a five-point stencil at h = 1e-3 keeps both truncation and roundoff below 1e-8
    z = _cell_points(g2, g3, rng, 40, keep_off=0.25)
    h = 1e-3
    d = [ctx.evaluate(z + k * h)[1] for k in (-2, -1, 1, 2)]
    p, _, _ = ctx.evaluate(z)
    fd = (d[0] - 8 * d[1] + 8 * d[2] - d[3]) / (12 * h)
    exact = 6 * p**2 - g2 / 2
    assert np.max(np.abs(fd - exact) / np.maximum(np.abs(exact), 1)) < 1e-6


@pytest.mark.parametrize("g2,g3", INVARIANTS)
def test_zeta_derivative_is_minus_wp(g2, g3, rng):
    ctx = context_for(g2, g3)
    z = _cell_points(g2, g3, rng, 40)
    h = 1e-5
    _, _, zp = ctx.evaluate(z + h, want_zeta=True)
    _, _, zm = ctx.evaluate(z - h, want_zeta=True)
    p, _, _ = ctx.evaluate(z)
    fd = (zp - zm) / (2 * h)
    assert np.max(np.abs(fd + p) / np.maximum(np.abs(p), 1)) < 1e-4


@pytest.mark.parametrize("g2,g3", INVARIANTS)
def test_periodicity(g2, g3, rng):
    ctx = context_for(g2, g3)
    b = lattice_periods(EllipticInvariants(g2, g3))
    z = _cell_points(g2, g3, rng, 40)
    p, _, _ = ctx.evaluate(z)
    for shift in (2 * b.omega1, 2 * b.omega2, 2 * b.omega1 - 4 * b.omega2):
        ps, _, _ = ctx.evaluate(z + shift)
        assert np.max(np.abs(ps - p) / np.abs(p)) < 1e-8


def test_degenerate_invariants_use_closed_forms():
    # g2 = 12, g3 = 8 has a double root: wp = e + s^2 / sinh^2(s z)
    ctx = context_for(12, 8)
    assert ctx.kind == "trig"
    z = np.array([0.3 + 0.2j, -0.7 + 1.1j])
    p, dp, _ = ctx.evaluate(z)
    assert np.allclose(dp**2, 4 * p**3 - 12 * p - 8, rtol=1e-10)
    assert context_for(0, 0).kind == "rational"
