from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meroode.briot_bouquet import bb_solve
from meroode.errors import NoFactorization, NoMeromorphicSolutions, ParticularOnly
from meroode.ode import OdeSpec
from meroode.reductions import (
    factorize_type3_cubic,
    particular_solution,
    reduce_type1,
    reduce_type2,
    reduce_type3_to_bb,
)
from meroode.solutions import expr as ex
from meroode.verify import SamplingConfig, residual_max


def test_type1_quartic_reduction():
    fam = reduce_type1([0, 0, 0, 0, 1])
    assert fam.coefficients({"C": 0.5}) == [0, 0, -1.0, 0, -1]
    assert fam.free_params == ("C",)


def test_type1_rejects_quadratic_term():
    with pytest.raises(NoMeromorphicSolutions):
        reduce_type1([0, 0, 1, 0, 1])


def test_type1_zero_polynomial():
    fam = reduce_type1([])
    assert fam.coefficients({"C": 2}) == [0, 0, -4, 0, 0]


def test_type2_quartic_with_friction():
    fam = reduce_type2(1, [0, 0, 0, 0, 1])
    expected = [-Fraction(3, 2), 3, -3, 2, -1]
    assert [Fraction(x) for x in fam.coefficients()] == expected


def test_type2_zero_polynomial_is_constant_only():
    assert all(x == 0 for x in reduce_type2(1, []).coefficients())


def test_type2_energy_integral():
    fam = reduce_type2(0, [0, 0, 1])
    assert fam.coefficients({"C": 7}) == [7, 0, 0, Fraction(-2, 3), 0]


@pytest.mark.parametrize("c,P", [(1, [0] * 5 + [1]), (0, [0, 0, 0, 0, 1])])
def test_type2_degree_limits(c, P):
    with pytest.raises(NoMeromorphicSolutions):
        reduce_type2(c, P)


def test_type1_integrating_factor(rng):
    ode = OdeSpec("Type1", (0.3, -0.5, 0, 0.7, 1.2))
    fam = reduce_type1(ode.P)
    eq = fam.bind({"C": 0.4 - 0.2j})
    u = bb_solve(eq)
    z = rng.uniform(-0.6, 0.6, 20) + 1j * rng.uniform(-0.6, 0.6, 20)
    w, dw, d2w = ex.jet_arrays(u, z, 2, {"z0": 0.9 + 0.4j})
    # (w')^2 = R(w) integrates w^-3 w' * ODE: d/dz[(w'^2 - R)/w^2] = 2 w^-3 w' * (w w'' - w'^2 + P)
    R = np.array(fam.coefficients({"C": 0.4 - 0.2j}), dtype=complex)
    dR = np.polyval(np.polyder(R[::-1]), w)
    lhs = (dw * (2 * d2w - dR) * w**2 - 2 * w * dw * (dw**2 - np.polyval(R[::-1], w))) / w**4
    ode_terms = ode.residual_terms(w, dw, d2w)
    rhs = 2 * w**-3 * dw * sum(ode_terms)
    scale = 2 * np.abs(w**-3 * dw) * np.max(np.abs(np.array(ode_terms)), axis=0)
    assert np.max(np.abs(lhs - rhs) / scale) < 1e-9


def test_type2_integrating_factor(rng):
    c = 0.6 + 0.2j
    ode = OdeSpec("Type2", (0.2, 0.1, -0.4, 0.5, 0.8), c)
    fam = reduce_type2(c, ode.P)
    u = bb_solve(fam.bind())
    z = rng.uniform(-0.6, 0.6, 20) + 1j * rng.uniform(-0.6, 0.6, 20)
    w, dw, d2w = ex.jet_arrays(u, z, 2, {"z0": 0.9 + 0.4j})
    R = np.array(fam.coefficients(), dtype=complex)
    dR = np.polyval(np.polyder(R[::-1]), w)
    # d/dz[e^{2cw}(w'^2 - R)] = 2 e^{2cw} w' * ODE, and e^{2cw} cancels on both sides
    lhs = 2 * c * dw * (dw**2 - np.polyval(R[::-1], w)) + dw * (2 * d2w - dR)
    ode_terms = ode.residual_terms(w, dw, d2w)
    rhs = 2 * dw * sum(ode_terms)
    scale = 2 * np.abs(dw) * np.max(np.abs(np.array(ode_terms)), axis=0)
    assert np.max(np.abs(lhs - rhs) / scale) < 1e-9


def test_factorization_example():
    f = factorize_type3_cubic(1, (-1, 1, 0), 3)
    assert (f.A1, f.B1, f.A2, f.B2, f.alpha) == (-1, 0, 2, -2, -1)


def test_no_factorization_example():
    with pytest.raises(NoFactorization):
        factorize_type3_cubic(1, (0, 0, 0), 2)


def test_factorization_with_swapped_roles():
    f = factorize_type3_cubic(1, (1, -1, 0), -3)
    # same pattern as the (-1, 1, 0), c = 3 example with q1 and q2 exchanged
    assert f.first_order_coefficient() == -3
    assert (f.A1, f.B1, f.A2, f.B2, f.alpha) == (-1, 0, 2, 2, 1)


small_q = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@given(
    st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=3),
    st.tuples(small_q, small_q, small_q),
    st.permutations(range(3)),
    st.sampled_from([1, -1]),
)
def test_factorization_expands_to_the_ode(lam, q, perm, s):
    Q = [q[i] for i in perm]
    c = (-Q[0] + 2 * Q[1] - Q[2]) / (s * lam)
    f = factorize_type3_cubic(lam, q, c)
    expanded = f.expanded()
    ode = OdeSpec.type3_cubic(lam, q, c)
    # the w' coefficient is the constant c (no w w' term) and f1 f2 (w - alpha) = P
    assert expanded["wprime"] == [c, 0]
    P = list(expanded["P"]) + [0] * (4 - len(expanded["P"]))
    assert P == list(ode.P) + [0] * (4 - len(ode.P))


def test_chain_composes_to_a_type3_solution():
    lam, mid, delta = 1.0, 0.3 - 0.1j, 0.5 + 0.2j
    q = (mid - delta, mid + delta, mid)
    c = 3 * delta / lam
    ode = OdeSpec.type3_cubic(lam, q, c)
    red = reduce_type3_to_bb(factorize_type3_cubic(lam, q, c), lam, q, c)
    eq = red.bb.bind({"beta": 0.7, "C": 0.4 + 0.3j})
    v = bb_solve(eq)
    w = red.chain.forward(v)
    rep = residual_max(ode, w, {"z0": 0.2 + 0.1j}, SamplingConfig(n_points=32, radius=1.2))
    assert rep.max_relative_residual < 1e-8


def test_chain_inverse_undoes_forward():
    lam, mid, delta = 1.0, 0.3, 0.5
    q = (mid - delta, mid + delta, mid)
    c = 3 * delta
    red = reduce_type3_to_bb(factorize_type3_cubic(lam, q, c), lam, q, c)
    v = bb_solve(red.bb.bind({"beta": 0.7, "C": 0.4}))
    bind = {"z0": 0.2}
    w = red.chain.forward(v)
    z = np.array([0.15 + 0.1j, 0.3 - 0.2j, -0.1 + 0.25j])
    recovered = red.chain.inverse(lambda x: ex.evaluate(w, x, bind))(z)
    H = ex.evaluate(ex.substitute(v, z=ex.exp(ex.const(red.xi_rate) * ex.Z)), z, bind)
    H_ref = ex.evaluate(ex.substitute(v, z=ex.exp(ex.const(red.xi_rate) * ex.Z)), np.array([0.1 + 0.05j]), bind)
    assert np.allclose(recovered, H / H_ref, rtol=1e-9)


def test_half_sum_failure_gives_particular_only():
    lam, q = 1, (0, 1, 3)
    c = (-0 + 2 * 1 - 3) / lam
    f = factorize_type3_cubic(lam, q, c)
    with pytest.raises(ParticularOnly) as info:
        reduce_type3_to_bb(f, lam, q, c)
    ode = OdeSpec.type3_cubic(lam, q, c)
    (w,) = info.value.families
    assert residual_max(ode, w, {"z0": 0.4}).max_relative_residual < 1e-10


def test_repeated_roots_give_rational_solution():
    lam, q = 1, (2, 2, -1)
    c = (-2 + 2 * 2 - (-1)) / lam
    f = factorize_type3_cubic(lam, q, c)
    w = particular_solution(f)
    ode = OdeSpec.type3_cubic(lam, q, c)
    assert residual_max(ode, w, {"z0": 0.4}).max_relative_residual < 1e-10
