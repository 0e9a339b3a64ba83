import cmath

import numpy as np
import pytest

from meroode.classify import (
    CONSTANTS_ONLY,
    FAMILIES,
    NO_NONCONSTANT,
    classify,
    classify_type1,
    classify_type2,
    classify_type3,
)
from meroode.local_analysis import expand_all
from meroode.ode import OdeSpec
from meroode.solutions import expr as ex
from meroode.verify import SamplingConfig, residual_max


def _check_family_residuals(report, rng, draws=10, structural=None, tol=1e-8):
    for fam in report.families:
        for i in range(draws):
            b = fam.sample_bindings(rng)
            if structural:
                b.update(structural(rng))
            e = fam.instantiate(b)
            rep = residual_max(report.ode, e, b, SamplingConfig(n_points=32, radius=1.2, seed=i))
            assert rep.max_relative_residual < tol, (fam.name, b, rep.max_relative_residual)


# -- Type1 -----------------------------------------------------------------------


def test_type1_quadratic_exp_family():
    rep = classify_type1([0, 0, 2])
    assert rep.verdict == FAMILIES and rep.provenance == "type1/k2"
    fam = rep.family("exp-quadratic")
    z = np.array([0.3 + 0.1j, -0.4 + 0.7j])
    got = ex.evaluate(fam.expr, z, {"c1": 1.5, "c2": 0.2})
    assert np.allclose(got, 1.5 * np.exp(-z * z + 0.2 * z), rtol=1e-13)


def test_type1_linear_term_forbids_solutions():
    assert classify_type1([0, 1, 1]).verdict == NO_NONCONSTANT


def test_type1_degree_bound():
    assert classify_type1([0, 0, 0, 0, 0, 1]).verdict == NO_NONCONSTANT


def test_type1_quartic_needs_vanishing_a2():
    assert classify_type1([0.1, 0, 0.3, 0, 1]).verdict == NO_NONCONSTANT
    rep = classify_type1([0.1, 0.2, 0, -0.5, 1])
    assert rep.verdict == FAMILIES
    _check_family_residuals(rep, np.random.default_rng(1), draws=5, structural=lambda g: {"C": complex(*g.normal(size=2))})


@pytest.mark.parametrize("P", [[], [0.7], [0.4, -1.1]])
def test_type1_low_degree_families(P, rng):
    rep = classify_type1(P)
    assert rep.verdict == FAMILIES
    _check_family_residuals(rep, rng)


def test_type1_scale_equivariance():
    # w = s W maps w w'' - w'^2 + P(w) = 0 to W W'' - W'^2 + P(s W) / s^2 = 0
    s = 0.7 - 0.4j
    for P in ([0, 0, 1.3 + 0.2j], [0.1, 0.2, 0, -0.5, 1], [0, 0, 0, 0, 0, 2]):
        scaled = [a * s**n / s**2 for n, a in enumerate(P)]
        a, b = classify_type1(P), classify_type1(scaled)
        assert (a.verdict, a.provenance) == (b.verdict, b.provenance)
    P = [0, 0, 1.3 + 0.2j]
    scaled = [a * s**n / s**2 for n, a in enumerate(P)]
    w = classify_type1(P).family("exp-quadratic").expr
    W = classify_type1(scaled).family("exp-quadratic").expr
    z = np.array([0.3 + 0.1j, -0.4 + 0.7j, 1.1 - 0.2j])
    lhs = ex.evaluate(w, z, {"c1": 0.9 * s, "c2": 0.3})
    rhs = s * ex.evaluate(W, z, {"c1": 0.9, "c2": 0.3})
    assert np.array_equal(lhs, rhs) or np.allclose(lhs, rhs, rtol=1e-15)


# -- Type2 -----------------------------------------------------------------------


def test_type2_trigonometric():
    rep = classify_type2(0, [0, 1])
    fam = rep.family("trigonometric")
    z = np.array([0.3, 1.2 + 0.5j])
    got = ex.evaluate(fam.expr, z, {"c1": 2, "c2": -1})
    assert np.allclose(got, 2 * np.sin(z) - np.cos(z))


def test_type2_quadratic():
    rep = classify_type2(0, [1])
    fam = rep.family("quadratic")
    z = np.array([0.3, 1.2 + 0.5j])
    got = ex.evaluate(fam.expr, z, {"c1": 2, "c2": -1})
    assert np.allclose(got, 2 - z - z * z / 2)


def test_type2_degree_bound():
    assert classify_type2(1, [0, 0, 0, 0, 0, 1]).verdict == NO_NONCONSTANT
    assert classify_type2(0, [0, 0, 0, 0, 1]).verdict == NO_NONCONSTANT


@pytest.mark.parametrize(
    "c,P",
    [
        (0, [0.3, -0.2, 1]),
        (0, [0.1, 0.5, 0.2, 0.7]),
        (0.8, [0.2, 0.1, -0.4, 0.5, 0.8]),
        (-0.5 + 0.3j, [0, 0, 1]),
        (1.2, [0.3, 1.0]),
    ],
)
def test_type2_families_solve_the_equation(c, P, rng):
    rep = classify_type2(c, P)
    assert rep.verdict == FAMILIES
    _check_family_residuals(rep, rng, structural=lambda g: {"C": complex(*g.normal(size=2))})


# -- Type3 -----------------------------------------------------------------------


def test_quadratic_exp_elliptic_example():
    rep = classify(OdeSpec.type3_quadratic(1, (1, 0), 5))
    assert rep.verdict == FAMILIES
    (fam,) = rep.families
    assert fam.name == "exp-elliptic-quadratic"
    z = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    b = {"zeta0": 0.3, "g3": 0.8}
    expected = np.exp(-2 * z) * ex.evaluate(ex.wp(ex.exp(-ex.Z) - 0.3, 0, 0.8), z)
    assert np.allclose(ex.evaluate(fam.expr, z, b), expected, rtol=1e-12)


def test_quadratic_condition_failure():
    rep = classify(OdeSpec.type3_quadratic(1, (1, 0), 1))
    assert rep.verdict == CONSTANTS_ONLY
    (name, value, ok), = rep.conditions_checked
    assert not ok and value == pytest.approx(1 * 26 * (-24))


def test_cubic_general_family_example():
    rep = classify(OdeSpec.type3_cubic(1, (-1, 1, 0), 3))
    fam = rep.family("exp-elliptic-cubic")
    assert fam.is_general_solution
    assert set(fam.free_params) == {"zeta0", "g2"}


def test_quartic_type3_reports_constants_with_evidence():
    rep = classify_type3(0.5, [0, 1, 0, 0, 2])
    assert rep.verdict == CONSTANTS_ONLY
    assert rep.evidence["integer_pole_order"] is False
    assert "not proved by" in rep.notes[0]


@pytest.mark.parametrize("c,P", [(0.4, [0.3, 1.1]), (0, [0.2, -1.0]), (0.6, [0.5]), (0, [1.5])])
def test_type3_linear_families(c, P, rng):
    rep = classify_type3(c, P)
    _check_family_residuals(rep, rng)


def _random_cubic(rng, satisfied: bool):
    lam = complex(*rng.normal(size=2))
    q = list(rng.normal(size=3) + 1j * rng.normal(size=3))
    c = complex(*rng.normal(size=2))
    if satisfied:
        s = rng.choice([1, -1])
        k = rng.integers(0, 3)
        i, j = [n for n in range(3) if n != k]
        # make c lam_s + q_i + q_j - 2 q_k vanish by moving q_i
        q[i] = 2 * q[k] - q[j] - c * s * lam
    return lam, q, c


def test_cubic_families_solve_the_equation(rng):
    for _ in range(10):
        lam, q, c = _random_cubic(rng, True)
        rep = classify(OdeSpec.type3_cubic(lam, q, c))
        assert rep.verdict == FAMILIES
        _check_family_residuals(rep, rng, draws=3)


def test_half_sum_cubic_families_solve_the_equation(rng):
    for _ in range(5):
        lam, mid, delta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        c = 3 * delta / lam
        rep = classify(OdeSpec.type3_cubic(lam, (mid - delta, mid + delta, mid), c))
        assert any(f.name.startswith("exp-elliptic-cubic") for f in rep.families)
        _check_family_residuals(rep, rng, draws=3)


def test_quadratic_families_solve_the_equation(rng):
    for _ in range(10):
        lam, e2, c = (complex(*rng.normal(size=2)) for _ in range(3))
        e1 = e2 + c * c * lam / 25
        rep = classify(OdeSpec.type3_quadratic(lam, (e1, e2), c))
        assert rep.verdict == FAMILIES
        _check_family_residuals(rep, rng, draws=3)


@pytest.mark.parametrize("q", [(0.5, -1.2, 0.3), (0.1 + 1j, -0.4, 0.9 - 0.2j)])
def test_zero_friction_cubic_uses_the_energy_integral(q, rng):
    rep = classify(OdeSpec.type3_cubic(0.9, q, 0))
    assert rep.provenance == "type3/deg3/c0"
    _check_family_residuals(rep, rng, draws=5, structural=lambda g: {"C": complex(*g.normal(size=2))})


def test_verdict_agrees_with_obstructions(rng):
    for n in range(200):
        lam, q, c = _random_cubic(rng, satisfied=n % 2 == 0)
        ode = OdeSpec.type3_cubic(lam, q, c)
        rep = classify(ode)
        lam_used = rep.ode.normal_form["lambda"]
        emitted = {complex(b) for f in rep.families for b in f.pole_branches}
        scale = max(1.0, max(abs(x) for x in q), abs(c * lam)) ** 4 * max(1, abs(c))
        for branch in expand_all(ode, 6):
            w0 = complex(branch.leading_coeff)
            vanishes = abs(complex(branch.obstruction_at(4))) < 1e-9 * scale
            has_family = any(abs(w0 - b) < 1e-9 * abs(lam) for b in emitted)
            assert vanishes == has_family, (n, lam_used, w0, branch.obstruction_at(4))
