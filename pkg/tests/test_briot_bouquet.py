import numpy as np
import pytest

from meroode.briot_bouquet import PATTERNS, bb_classify_roots, bb_from_roots, bb_residual, bb_solve
from meroode.numerics import PolyCoeffs
from meroode.reductions import BBEquation
from meroode.solutions import expr as ex

MULTIPLICITIES = {name: mults for (_, mults), name in PATTERNS.items()}


def random_equation(pattern, rng):
    """A BB equation with the requested multiplicity pattern and random complex data."""
    mults = MULTIPLICITIES[pattern]
    while True:
        roots = rng.normal(size=len(mults)) + 1j * rng.normal(size=len(mults))
        gaps = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
        if not gaps or min(gaps) > 0.3:
            break
    a_k = complex(*rng.normal(size=2))
    if abs(a_k) < 0.3:
        a_k += 0.5
    if pattern == "Deg0":
        return BBEquation.from_poly(PolyCoeffs([a_k]))
    return bb_from_roots(a_k, [(complex(r), m) for r, m in zip(roots, mults)])


def safe_points(e, bindings, rng, n=32, radius=1.2):
    z = radius * np.sqrt(rng.uniform(size=4 * n)) * np.exp(2j * np.pi * rng.uniform(size=4 * n))
    with np.errstate(all="ignore"):
        u, du = ex.jet_arrays(e, z, 1, bindings)
    ok = np.isfinite(u) & np.isfinite(du) & (np.abs(u) < 1e4)
    return z[ok][:n]


def test_pattern_examples():
    eq = BBEquation.from_poly(PolyCoeffs.from_roots([(1, 1), (2, 1), (3, 1)], 1))
    assert bb_classify_roots(eq).pattern == "Distinct3"
    eq = BBEquation.from_poly(PolyCoeffs.from_roots([(1, 2), (3, 1), (5, 1)], 1))
    assert bb_classify_roots(eq).pattern == "Double4"
    eq = BBEquation.from_poly(PolyCoeffs.from_roots([(2, 4)], 1))
    assert bb_classify_roots(eq).pattern == "Quad4"


def test_linear_example():
    u = bb_solve(BBEquation.from_poly(PolyCoeffs([0, 4])))
    z = np.array([0.5, 1.5 + 1j])
    assert np.allclose(ex.evaluate(u, z, {"z0": 0}), z**2)


def test_constant_example():
    eq = BBEquation.from_poly(PolyCoeffs([4]))
    z = np.array([0.5, -1 + 2j])
    assert np.allclose(ex.evaluate(bb_solve(eq), z, {"z0": 0}), 2 * z)
    assert np.allclose(ex.evaluate(bb_solve(eq, branch=-1), z, {"z0": 0}), -2 * z)


def test_cubic_example_is_plain_wp():
    eq = BBEquation.from_poly(PolyCoeffs.from_roots([(1, 1), (-1, 1), (0, 1)], 4))
    z = np.array([0.3 + 0.2j, 0.9 - 0.4j])
    assert np.allclose(ex.evaluate(bb_solve(eq), z, {"z0": 0}), ex.evaluate(ex.wp(ex.Z, 4, 0), z), rtol=1e-12)


def test_quadruple_example():
    eq = BBEquation.from_poly(PolyCoeffs.from_roots([(2, 4)], 1))
    z = np.array([0.3 + 0.2j, 0.9 - 0.4j])
    plus = ex.evaluate(bb_solve(eq), z, {"z0": 0})
    minus = ex.evaluate(bb_solve(eq, branch=-1), z, {"z0": 0})
    assert np.allclose(plus, 2 + 1 / z) and np.allclose(minus, 2 - 1 / z)


@pytest.mark.parametrize("pattern", sorted(MULTIPLICITIES))
def test_every_branch_solves_its_equation(pattern, rng):
    for _ in range(10):
        eq = random_equation(pattern, rng)
        assert bb_classify_roots(eq).pattern == pattern
        u = bb_solve(eq)
        bindings = {"z0": complex(*rng.uniform(-0.5, 0.5, size=2))}
        z = safe_points(u, bindings, rng)
        assert len(z) == 32
        assert np.max(bb_residual(eq, u, z, bindings)) < 1e-8


def test_trivial_equation_gives_free_constant():
    u = bb_solve(BBEquation.from_poly(PolyCoeffs([])))
    assert ex.params_of(u) == {"u0"}


def test_bad_branch_argument():
    with pytest.raises(ValueError):
        bb_solve(BBEquation.from_poly(PolyCoeffs([4])), branch=0)


@pytest.mark.parametrize("eps", [1e-3])
def test_double_root_degeneration(eps):
    # Distinct3 with e1 = e2 + eps against the Double3 coth^2 branch: both have
    # the double pole 4 / (a3 t^2) at t = 0, so they agree to O(eps) nearby
    a3, e2, e3 = 1.3 - 0.2j, 0.4 + 0.1j, -0.7 + 0.3j
    split = bb_from_roots(a3, [(e2 + eps, 1), (e2, 1), (e3, 1)])
    double = bb_from_roots(a3, [(e2, 2), (e3, 1)])
    assert bb_classify_roots(split).pattern == "Distinct3"
    assert bb_classify_roots(double).pattern == "Double3"
    z = np.array([0.2 + 0.1j, -0.3 + 0.25j, 0.4 - 0.35j, 0.1 - 0.5j])
    u1 = ex.evaluate(bb_solve(split), z, {"z0": 0})
    u2 = ex.evaluate(bb_solve(double), z, {"z0": 0})
    assert np.max(np.abs(u1 - u2) / np.abs(u2)) < 1e-2


def test_triple_root_degeneration():
    # Double3 with the simple root eps away from the double root tends to Triple3
    a3, e1, eps = 0.8 + 0.5j, -0.2 + 0.6j, 1e-3
    near = bb_from_roots(a3, [(e1, 2), (e1 + eps, 1)])
    triple = bb_from_roots(a3, [(e1, 3)])
    assert bb_classify_roots(triple).pattern == "Triple3"
    z = np.array([0.2 + 0.1j, -0.3 + 0.25j, 0.4 - 0.35j])
    u1 = ex.evaluate(bb_solve(near), z, {"z0": 0})
    u2 = ex.evaluate(bb_solve(triple), z, {"z0": 0})
    assert np.max(np.abs(u1 - u2) / np.abs(u2)) < 1e-2


def test_zeta_and_ratio_forms_agree(rng):
    from meroode.briot_bouquet import quartic_zeta_form

    for _ in range(5):
        eq = random_equation("Distinct4", rng)
        ratio = bb_solve(eq)
        zeta = quartic_zeta_form(eq)
        b = {"z0": 0.1 + 0.2j}
        z = safe_points(ratio, b, rng, n=10)
        v1 = ex.evaluate(ratio, z, b)
        v2 = ex.evaluate(zeta, z, b)
        assert np.max(np.abs(v1 - v2) / (1 + np.abs(v1))) < 1e-7
