import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma

from meroode.errors import DegenerateLattice, RootsNotCentered, UnsupportedDegree
from meroode.numerics import (
    EllipticInvariants,
    PolyCoeffs,
    invariants_from_roots,
    lattice_periods,
    roots_low_degree,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def _as_multiset(roots):
    out = []
    for r, m in roots:
        out.extend([r] * m)
    return sorted(out, key=lambda z: (round(z.real, 6), round(z.imag, 6)))


def test_cubic_with_integer_roots():
    roots = roots_low_degree(PolyCoeffs([-6, 11, -6, 1]))
    assert [m for _, m in roots] == [1, 1, 1]
    assert np.allclose(sorted(r.real for r, _ in roots), [1, 2, 3], atol=1e-12)


def test_conjugate_pair():
    roots = roots_low_degree(PolyCoeffs([1, 0, 1]))
    assert sorted(round(r.imag) for r, _ in roots) == [-1, 1]


def test_quadruple_root_is_merged():
    assert roots_low_degree(PolyCoeffs([0, 0, 0, 0, 1])) == [(0j, 4)]


def test_two_double_roots_are_merged():
    p = PolyCoeffs.from_roots([(1 + 1j, 2), (-2, 2)], 3)
    roots = roots_low_degree(p)
    assert sorted(m for _, m in roots) == [2, 2]


@pytest.mark.parametrize("coeffs", [[5], [0, 0, 0, 0, 0, 1]])
def test_degree_out_of_range(coeffs):
    with pytest.raises(UnsupportedDegree):
        roots_low_degree(PolyCoeffs(coeffs))


@given(st.lists(cplx, min_size=1, max_size=4), cplx.filter(lambda z: abs(z) > 0.1))
def test_reconstruction_matches_input(rs, lead):
    p = PolyCoeffs.from_roots([(r, 1) for r in rs], lead)
    rebuilt = PolyCoeffs.from_roots(roots_low_degree(p), p.leading)
    scale = p.scale()
    for i in range(p.degree + 1):
        assert abs(rebuilt.coeff(i) - p.coeff(i)) <= 1e-9 * scale


def test_invariants_examples():
    inv = invariants_from_roots(1, -1, 0)
    assert (inv.g2, inv.g3) == (4, 0)
    inv = invariants_from_roots(2, -1, -1)
    assert (inv.g2, inv.g3) == (12, 8)
    with pytest.raises(RootsNotCentered):
        invariants_from_roots(1, 1, 1)


def test_invariants_roundtrip_random(rng):
    for _ in range(100):
        g2, g3 = rng.normal(size=2) + 1j * rng.normal(size=2)
        inv = EllipticInvariants(complex(g2), complex(g3))
        back = invariants_from_roots(*inv.roots())
        assert abs(back.g2 - g2) <= 1e-9 * max(1, abs(g2))
        assert abs(back.g3 - g3) <= 1e-9 * max(1, abs(g3))


def test_lemniscatic_half_period_against_gamma():
    # Gamma(1/4)^2 / (4 sqrt(pi)) is the real half-period for g2 = 1; rescaling
    # to g2 = 4 (t = 1/sqrt 2 in the homogeneity relation) divides it by sqrt 2
    expected = gamma(0.25) ** 2 / (4 * math.sqrt(2 * math.pi))
    b = lattice_periods(EllipticInvariants(4, 0))
    assert abs(b.omega1 - expected) < 1e-12
    assert abs(b.omega1 - 1.311029) < 1e-6


def test_lemniscatic_half_period_against_quadrature():
    val, _ = quad(lambda t: 1 / math.sqrt(4 * t**3 - 4 * t), 1, np.inf)
    assert abs(lattice_periods(EllipticInvariants(4, 0)).omega1 - val) < 1e-7


def test_scaled_invariants_double_the_period():
    assert abs(lattice_periods(EllipticInvariants(0.25, 0)).omega1 - 2.622058) < 1e-6


def test_degenerate_lattice():
    with pytest.raises(DegenerateLattice):
        lattice_periods(EllipticInvariants(3, 1))


def test_basis_orientation_and_area(rng):
    for _ in range(20):
        g2, g3 = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = lattice_periods(EllipticInvariants(complex(g2), complex(g3)))
        assert b.tau.imag > 0
        assert b.cell_area > 0


@given(st.floats(0.5, 2.0))
def test_period_homogeneity(t):
    g2, g3 = 1.3 - 0.4j, 0.7 + 0.2j
    base = lattice_periods(EllipticInvariants(g2, g3)).omega1
    scaled = lattice_periods(EllipticInvariants(g2 / t**4, g3 / t**6)).omega1
    assert abs(scaled - t * base) <= 1e-8 * abs(t * base)
