from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meroode.local_analysis import (
    LaurentSeries,
    MultiIndexTerm,
    dominant_balance,
    expand_all,
    formal_expand,
    hayman_order_bound,
    hayman_terms,
    ode_residual_series,
)
from meroode.ode import OdeSpec

small_q = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def test_type1_quartic_balance():
    branches = dominant_balance(OdeSpec("Type1", (0, 0, 0, 0, 1)))
    assert [b.p for b in branches] == [-1, -1]
    assert sorted(complex(b.leading_coeff).imag for b in branches) == pytest.approx([-1, 1])
    assert all(abs(complex(b.leading_coeff).real) < 1e-14 for b in branches)


def test_type3_cubic_balance_is_plus_minus_lambda():
    ode = OdeSpec.type3_cubic(1, (0, 1, 5), 0)
    branches = dominant_balance(ode, exact=True)
    assert [(b.p, b.leading_coeff) for b in branches] == [(-1, 1), (-1, -1)]


def test_type3_quadratic_balance_is_double_pole():
    ode = OdeSpec.type3_quadratic(1, (2, -3), 0)
    branches = dominant_balance(ode, exact=True)
    assert [(b.p, b.leading_coeff) for b in branches] == [(-2, 1)]


def test_linear_p_has_no_pole_balance():
    assert dominant_balance(OdeSpec("Type3", (1, 2), 1)) == []


def test_cubic_obstruction_examples():
    ode = OdeSpec.type3_cubic(1, (0, 0, 0), 2)
    plus = formal_expand(ode, dominant_balance(ode, exact=True)[0], 6)
    assert plus.fuchs_indices == (-1, 4)
    assert plus.obstruction_at(4) != 0

    ode = OdeSpec.type3_cubic(1, (-1, 1, 0), 3)
    plus = formal_expand(ode, dominant_balance(ode, exact=True)[0], 6)
    assert plus.obstruction_at(4) == 0


def test_order_below_the_resonance_is_rejected():
    ode = OdeSpec.type3_cubic(1, (0, 0, 0), 2)
    with pytest.raises(ValueError):
        formal_expand(ode, dominant_balance(ode)[0], 3)


def _cubic_product(lam, q, c):
    out = c
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        out *= c * lam + q[i] + q[j] - 2 * q[k]
    return out


@given(
    st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4),
    st.tuples(small_q, small_q, small_q),
    small_q,
)
def test_cubic_obstruction_matches_product_exactly(lam, q, c):
    ode = OdeSpec.type3_cubic(lam, q, c)
    for sign, branch in zip((1, -1), expand_all(ode, 6, exact=True)):
        assert branch.leading_coeff == sign * lam
        assert branch.fuchs_indices == (-1, 4)
        vanishes = branch.obstruction_at(4) == 0
        assert vanishes == (_cubic_product(sign * lam, q, c) == 0)


@given(
    st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4),
    st.tuples(small_q, small_q),
    small_q,
)
def test_quadratic_obstruction_matches_product_exactly(lam, e, c):
    ode = OdeSpec.type3_quadratic(lam, e, c)
    (branch,) = expand_all(ode, 8, exact=True)
    assert branch.fuchs_indices == (-1, 6)
    cond = c * (c * c * lam + 25 * e[0] - 25 * e[1]) * (c * c * lam - 25 * e[0] + 25 * e[1])
    assert (branch.obstruction_at(6) == 0) == (cond == 0)


def test_residual_series_vanishes_away_from_resonance():
    ode = OdeSpec.type3_cubic(Fraction(3, 2), (Fraction(1, 2), -1, 2), Fraction(1, 3))
    branch = expand_all(ode, 9, exact=True)[0]
    res = ode_residual_series(ode, branch.series)
    base = -3  # w'' ~ (z - z0)^-3 dominates at p = -1
    for n in range(0, 10):
        value = res[base + n]
        if n == 4:
            assert value == branch.obstruction_at(4)
        else:
            assert value == 0


def test_floating_expansion_residual_is_small(rng):
    lam = 0.8 + 0.3j
    q = rng.normal(size=3) + 1j * rng.normal(size=3)
    ode = OdeSpec.type3_cubic(lam, tuple(q), 0.7 - 0.2j)
    for branch in expand_all(ode, 9):
        res = ode_residual_series(ode, branch.series)
        scale = max(abs(complex(res[-3 + n])) for n in (0, 4)) + 1
        for n in range(0, 10):
            if n != 4:
                assert abs(complex(res[-3 + n])) < 1e-10 * scale


rational_series = st.lists(small_q, min_size=1, max_size=6).filter(lambda c: c[0] != 0)


@given(st.integers(-3, 2), rational_series, st.integers(-2, 2), rational_series)
def test_laurent_product_rule_exact(pf, cf, pg, cg):
    f = LaurentSeries(pf, cf, upto=6)
    g = LaurentSeries(pg, cg, upto=6)
    lhs = (f * g).deriv()
    rhs = f.deriv() * g + f * g.deriv()
    top = min(lhs.truncation_order, rhs.truncation_order)
    for e in range(pf + pg - 1, top):
        assert lhs[e] == rhs[e]


def test_hayman_inapplicable_example():
    # w w'' - w'^2 - w w'
    terms = [
        MultiIndexTerm((1,), (1, 0, 1)),
        MultiIndexTerm((-1,), (0, 2, 0)),
        MultiIndexTerm((-1,), (1, 1, 0)),
    ]
    assert not hayman_order_bound(terms).applicable


def test_hayman_examples_with_bounds():
    res = hayman_order_bound(hayman_terms(OdeSpec("Type2", (0, 0, 1), 0)))
    assert res.applicable and res.bound == 1.0
    res = hayman_order_bound([MultiIndexTerm((0, 1), (0, 1)), MultiIndexTerm((1,), (1,))])
    assert res.applicable and res.bound == 2.0 and res.d == 1


def test_multi_index_weight():
    t = MultiIndexTerm((1, 2, 0), (2, 0, 3))
    assert (t.degree, t.weight, t.coeff_poly_degree) == (5, 11, 1)


def _brute_force(terms):
    # scan every term for the top degree, then the top weight among those
    by_key = {}
    for t in terms:
        by_key.setdefault((t.degree, t.weight), []).append(t)
    deg = max(k[0] for k in by_key)
    wt = max(k[1] for k in by_key if k[0] == deg)
    total = np.zeros(8)
    for t in by_key[(deg, wt)]:
        total[: len(t.coeff)] += t.coeff
    d = max(t.coeff_poly_degree for t in terms)
    return (None if not total.any() else max(2 * d, 1 + d))


term_strategy = st.builds(
    MultiIndexTerm,
    st.lists(st.integers(-2, 2), min_size=1, max_size=3).map(tuple),
    st.lists(st.integers(0, 2), min_size=3, max_size=3).map(tuple),
)


@given(st.lists(term_strategy, min_size=1, max_size=6))
def test_hayman_matches_brute_force(terms):
    res = hayman_order_bound(terms)
    assert res.bound == _brute_force(terms)
