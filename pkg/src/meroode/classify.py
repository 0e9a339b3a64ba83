"""Existence verdicts and closed-form families for the three ODE families.

The decision procedure per family:

Type1  ww'' - w'^2 + P(w) = 0
    k >= 5: no nonconstant meromorphic solution. k = 3, 4 needs a2 = 0 and
    reduces to a quartic binomial equation with a free constant C. k = 2 needs
    a0 = a1 = 0 and gives c1 exp(-a2 z^2/2 + c2 z). k <= 1 is a linear-type
    equation solved by cosh / polynomial families.
Type2  w'' + c w'^2 + P(w) = 0
    c = 0: k <= 1 entire families, k = 2, 3 energy integral, k >= 4 none.
    c != 0: k <= 4 quartic binomial equation with the constant forced to 0.
Type3  w'' + c w' + P(w) = 0
    degree 2 and 3 use the normal forms -(6/lam)(w - e1)(w - e2) and
    -(2/lam^2) prod (w - q_i) and test the compatibility polynomials in c;
    degree <= 1 is linear; degree >= 4 is reported as constants only.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .briot_bouquet import bb_classify_roots, bb_solve
from .config import DEFAULT, Tolerances
from .errors import NoMeromorphicSolutions
from .numerics import PolyCoeffs, roots_low_degree
from .ode import OdeSpec
from .reductions import BBFamily, reduce_type1, reduce_type2
from .solutions import closed_forms as cf
from .solutions import expr as ex

NO_NONCONSTANT = "NoNonconstant"
CONSTANTS_ONLY = "ConstantsOnly"
FAMILIES = "Families"


@dataclass
class SolutionFamily:
    """A family of solutions with named free parameters.

    ``structural`` names parameters that change the shape of the expression
    (e.g. the integration constant C of a binomial equation); they are
    consumed by ``builder``. All other parameters stay symbolic in the tree.
    """

    name: str
    label: str
    free_params: dict  # name -> domain note
    is_general_solution: bool
    expr: ex.Expr | None = None
    builder: Callable[[Mapping], ex.Expr] | None = None
    structural: tuple = ()
    pole_branches: tuple = ()  # leading coefficients of the pole balances it realises
    samplers: dict = field(default_factory=dict)  # name -> callable(rng) overriding the default draw
    notes: str = ""

    def instantiate(self, bindings: Mapping | None = None) -> ex.Expr:
        bindings = dict(bindings or {})
        if self.builder is None:
            return self.expr
        missing = [p for p in self.structural if p not in bindings]
        if missing:
            from .errors import UnboundParam

            raise UnboundParam(f"structural parameters {missing} must be bound")
        return self.builder({p: bindings[p] for p in self.structural})

    def sample_bindings(self, rng: np.random.Generator, scale: float = 0.6) -> dict:
        out = {}
        for name in sorted(self.free_params):
            if name in self.samplers:
                out[name] = self.samplers[name](rng)
                continue
            dom = self.free_params[name]
            if dom == "sign":
                out[name] = float(rng.choice([-1.0, 1.0]))
                continue
            v = complex(rng.normal(), rng.normal()) * scale
            if "nonzero" in dom:
                while abs(v) < 0.2:
                    v = complex(rng.normal(), rng.normal()) * scale
            out[name] = v
        return out

    def to_dict(self, bindings: Mapping | None = None) -> dict:
        from .solutions.serialize import to_json_obj

        d = {
            "name": self.name,
            "label": self.label,
            "free_params": dict(sorted(self.free_params.items())),
            "is_general_solution": self.is_general_solution,
            "structural_params": list(self.structural),
            "pole_branches": [_num(b) for b in self.pole_branches],
        }
        if self.notes:
            d["notes"] = self.notes
        if self.builder is None:
            d["expr"] = to_json_obj(self.expr)
        elif bindings is not None and all(p in bindings for p in self.structural):
            d["expr"] = to_json_obj(self.instantiate(bindings))
            d["structural_bindings"] = {p: _num(bindings[p]) for p in self.structural}
        return d


@dataclass
class ClassificationReport:
    ode: OdeSpec
    verdict: str
    provenance: str
    families: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    conditions_checked: list = field(default_factory=list)  # (name, value, satisfied)
    evidence: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def family(self, name: str) -> SolutionFamily:
        for f in self.families:
            if f.name == name:
                return f
        raise KeyError(name)

    def family_names(self) -> list[str]:
        return [f.name for f in self.families]

    def to_dict(self, structural_bindings: Mapping | None = None) -> dict:
        return {
            "ode": ode_to_dict(self.ode),
            "verdict": self.verdict,
            "provenance": self.provenance,
            "families": [f.to_dict(structural_bindings) for f in self.families],
            "constants": [_num(c) for c in self.constants],
            "conditions_checked": [
                {"name": n, "value": _num(v), "satisfied": bool(s)} for n, v, s in self.conditions_checked
            ],
            "evidence": self.evidence,
            "notes": list(self.notes),
        }


def _num(v):
    from .solutions.serialize import encode_number

    return encode_number(v)


def ode_to_dict(ode: OdeSpec) -> dict:
    d = {"family": ode.family, "P": [_num(a) for a in ode.P], "c": _num(ode.c)}
    if ode.normal_form:
        nf = {}
        for k, v in ode.normal_form.items():
            nf[k] = [_num(x) for x in v] if isinstance(v, (tuple, list)) else _num(v)
        d["normal_form"] = nf
    return d


# -- helpers ------------------------------------------------------------------------


def _trim(P: Sequence) -> list:
    out = list(P)
    while out and out[-1] == 0:
        out.pop()
    return out


def _scale(*vals) -> float:
    return max([abs(complex(v)) for v in vals] + [1.0])


def _near_zero(x, scale: float, tols: Tolerances) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(complex(x)) <= tols.zero * scale


def _constants(P: Sequence, tols: Tolerances) -> list[complex]:
    P = _trim(P)
    if len(P) <= 1:
        return []
    poly = PolyCoeffs([complex(a) for a in P])
    if poly.degree > 4:
        return [complex(r) for r in np.roots(np.array(poly.coefficients[::-1]))]
    return [r for r, _ in roots_low_degree(poly, tols=tols)]


def _bb_family(name: str, label: str, fam: BBFamily, tols: Tolerances, notes: str, pole_branches=()) -> SolutionFamily:
    structural = fam.free_params

    def builder(b: Mapping) -> ex.Expr:
        return bb_solve(fam.bind(b, tols=tols), tols=tols)

    params = {p: "complex" for p in structural}
    params["z0"] = "complex"
    return SolutionFamily(
        name=name,
        label=label,
        free_params=params,
        is_general_solution=True,
        builder=builder if structural else None,
        expr=None if structural else bb_solve(fam.bind({}, tols=tols), tols=tols),
        structural=structural,
        pole_branches=tuple(pole_branches),
        notes=notes + " | " + fam.describe(),
    )


def _nonzero(rng: np.random.Generator) -> complex:
    v = 0j
    while abs(v) < 0.3:
        v = complex(rng.normal(), rng.normal()) * 0.8
    return v


# -- Type1 --------------------------------------------------------------------------


def classify_type1(P: Sequence, *, tols: Tolerances = DEFAULT) -> ClassificationReport:
    P = _trim(P)
    ode = OdeSpec("Type1", tuple(P))
    k = len(P) - 1
    consts = _constants(P, tols)
    if k < 0:
        fam = SolutionFamily(
            "exp-linear", "type1/zero-polynomial", {"c1": "nonzero complex", "c2": "complex"}, True, cf.exp_linear()
        )
        return ClassificationReport(ode, FAMILIES, "type1/zero-polynomial", [fam])
    if k >= 5:
        return ClassificationReport(
            ode, NO_NONCONSTANT, "type1/degree-bound", constants=consts,
            conditions_checked=[("degree <= 4", k, False)],
        )
    a = P + [0] * (5 - len(P))
    if k == 2:
        s = _scale(*P)
        ok0, ok1 = _near_zero(a[0], s, tols), _near_zero(a[1], s, tols)
        checks = [("a0 = 0", a[0], ok0), ("a1 = 0", a[1], ok1)]
        if not (ok0 and ok1):
            return ClassificationReport(ode, NO_NONCONSTANT, "type1/k2", constants=consts, conditions_checked=checks)
        fam = SolutionFamily(
            "exp-quadratic", "type1/k2", {"c1": "nonzero complex", "c2": "complex"}, True, cf.exp_quadratic(a[2]),
            notes="zero-free entire family",
        )
        return ClassificationReport(ode, FAMILIES, "type1/k2", [fam], constants=consts, conditions_checked=checks)
    if k in (3, 4):
        try:
            fam_bb = reduce_type1(P, tols=tols)
        except NoMeromorphicSolutions as exc:
            return ClassificationReport(
                ode, NO_NONCONSTANT, "type1/k34", constants=consts,
                conditions_checked=[("a2 = 0", a[2], False)], notes=[str(exc)],
            )
        fam = _bb_family("binomial-quartic", "type1/k34", fam_bb, tols, "integrating factor w^-3 w'")
        return ClassificationReport(
            ode, FAMILIES, "type1/k34", [fam], constants=consts, conditions_checked=[("a2 = 0", a[2], True)]
        )
    # k in (0, 1): linear-coefficient context (the quotient ww'' - w'^2 is log-linear)
    notes = ["degree <= 1: handled by the constant-coefficient linear-type formulas"]
    if k == 0:
        fams = [
            SolutionFamily(
                "cosh", "type1/k0", {"beta": "nonzero complex", "gamma": "complex"}, True, cf.type1_k0_cosh(a[0])
            ),
            SolutionFamily("linear", "type1/k0", {"z0": "complex"}, False, cf.type1_k0_linear(a[0])),
        ]
        return ClassificationReport(ode, FAMILIES, "type1/k0", fams, notes=notes)
    a0, a1 = a[0], a[1]

    def k1_builder(b):
        s = cf.type1_k1_amplitude(a0, a1, b["beta"])
        return ex.substitute(cf.type1_k1_cosh(a0, a1), params={"s": s})

    fams = [
        SolutionFamily(
            "cosh", "type1/k1", {"beta": "nonzero complex", "gamma": "complex"}, True,
            builder=k1_builder, structural=("beta",),
        ),
        SolutionFamily("polynomial", "type1/k1", {"b": "complex"}, False, cf.type1_k1_polynomial(a0, a1)),
    ]
    return ClassificationReport(ode, FAMILIES, "type1/k1", fams, constants=consts, notes=notes)


# -- Type2 --------------------------------------------------------------------------


def classify_type2(c, P: Sequence, *, tols: Tolerances = DEFAULT) -> ClassificationReport:
    P = _trim(P)
    ode = OdeSpec("Type2", tuple(P), c)
    k = len(P) - 1
    consts = _constants(P, tols)
    a = P + [0] * max(0, 5 - len(P))
    c_zero = _near_zero(c, 1.0, tols)
    if c_zero:
        if k >= 4:
            return ClassificationReport(
                ode, NO_NONCONSTANT, "type2/c0/degree-bound", constants=consts,
                conditions_checked=[("degree <= 3", k, False)],
            )
        if k <= 0:
            fam = SolutionFamily(
                "quadratic", "type2/c0/entire", {"c1": "complex", "c2": "complex"}, True,
                cf.quadratic_family(a[0] if k == 0 else 0),
            )
            return ClassificationReport(ode, FAMILIES, "type2/c0/entire", [fam], constants=consts)
        if k == 1:
            fam = SolutionFamily(
                "trigonometric", "type2/c0/entire", {"c1": "complex", "c2": "complex"}, True,
                cf.trig_family(a[0], a[1]),
            )
            return ClassificationReport(ode, FAMILIES, "type2/c0/entire", [fam], constants=consts)
        fam = _bb_family("binomial-energy", "type2/c0/elliptic", reduce_type2(0, P, tols=tols), tols, "energy integral")
        return ClassificationReport(ode, FAMILIES, "type2/c0/elliptic", [fam], constants=consts)
    if k >= 5:
        return ClassificationReport(
            ode, NO_NONCONSTANT, "type2/c/degree-bound", constants=consts,
            conditions_checked=[("degree <= 4", k, False)],
        )
    fam_bb = reduce_type2(c, P, tols=tols)
    eq = fam_bb.bind({}, tols=tols)
    if eq.is_trivial:
        return ClassificationReport(
            ode, NO_NONCONSTANT, "type2/c/trivial", constants=consts,
            notes=["first integral forces w' = 0"],
        )
    fams = []
    branches = (1, -1) if bb_classify_roots(eq, tols=tols).pattern in ("Deg0", "Double2", "Quad4") else (1,)
    for br in branches:
        fams.append(
            SolutionFamily(
                "binomial-quartic" if br == 1 else "binomial-quartic-minus",
                "type2/c/elliptic",
                {"z0": "complex"},
                True,
                bb_solve(eq, branch=br, tols=tols),
                notes="integrating factor e^{2cw} w', constant forced to 0 | " + fam_bb.describe(),
            )
        )
    return ClassificationReport(ode, FAMILIES, "type2/c/elliptic", fams, constants=consts)


# -- Type3 --------------------------------------------------------------------------


def _principal_sqrt(x) -> complex:
    return cmath.sqrt(complex(x))


def quadratic_condition(lam, e1, e2, c):
    """c (c^2 lam + 25 e1 - 25 e2)(c^2 lam - 25 e1 + 25 e2)."""
    return c * (c * c * lam + 25 * e1 - 25 * e2) * (c * c * lam - 25 * e1 + 25 * e2)


def cubic_condition(lam_s, q, c):
    """c prod_{(i j k)} (c lam_s + q_i + q_j - 2 q_k) over the three distinct factors."""
    out = c
    for k in range(3):
        i, j = [n for n in range(3) if n != k]
        out = out * (c * lam_s + q[i] + q[j] - 2 * q[k])
    return out


def classify_type3(c, P: Sequence, *, tols: Tolerances = DEFAULT) -> ClassificationReport:
    P = _trim(P)
    ode = OdeSpec("Type3", tuple(P), c)
    k = len(P) - 1
    consts = _constants(P, tols)
    if k <= 1:
        return _type3_linear(ode, c, P, tols)
    if k == 2:
        return _type3_quadratic(ode, c, P, consts, tols)
    if k == 3:
        return _type3_cubic(ode, c, P, consts, tols)
    p_frac = Fraction(-2, k - 1)
    return ClassificationReport(
        ode, CONSTANTS_ONLY, "type3/degree>=4", constants=consts,
        evidence={"pole_order_balance": str(p_frac), "integer_pole_order": p_frac.denominator == 1},
        notes=[
            "classifier verdict consistent with, not proved by, the existence theory: "
            "the leading balance (k - 1) p = -2 has no integer solution p < 0"
        ],
    )


def _type3_linear(ode, c, P, tols) -> ClassificationReport:
    a = P + [0] * (2 - len(P))
    a0, a1 = a[0], a[1]
    c_c = complex(c)
    if not _near_zero(a1, 1.0, tols):
        roots = roots_low_degree(PolyCoeffs([complex(a1), c_c, 1.0]), tols=tols)
        rs = [r for r, m in roots for _ in range(1)] if len(roots) == 2 else [roots[0][0]]
        fam_expr = cf.linear_homogeneous(rs, -complex(a0) / complex(a1))
    elif not _near_zero(c, 1.0, tols):
        fam_expr = cf.exp_decay_family(c) - ex.const(complex(a0) / c_c) * ex.Z
    else:
        fam_expr = cf.quadratic_family(a0)
    fam = SolutionFamily("linear", "type3/linear", {"c1": "complex", "c2": "complex"}, True, fam_expr)
    return ClassificationReport(ode, FAMILIES, "type3/linear", [fam], notes=["linear constant-coefficient equation"])


def _type3_quadratic(ode, c, P, consts, tols) -> ClassificationReport:
    a2 = P[2]
    lam = _div(-6, a2)
    roots = roots_low_degree(PolyCoeffs([complex(x) for x in P]), tols=tols)
    es = [r for r, m in roots for _ in range(m)]
    e1, e2 = es
    if ode.normal_form.get("e"):
        e1, e2 = ode.normal_form["e"]
    cond = quadratic_condition(complex(lam), complex(e1), complex(e2), complex(c))
    scale = _scale(e1, e2, lam) ** 2 * max(abs(complex(c)), 1.0) ** 5 * 625
    holds = _near_zero(cond, scale, tols)
    checks = [("c (c^2 lam + 25 e1 - 25 e2)(c^2 lam - 25 e1 + 25 e2) = 0", cond, holds)]
    ode = OdeSpec("Type3", tuple(P), c, {"lambda": lam, "e": (e1, e2)})
    if not holds:
        return ClassificationReport(ode, CONSTANTS_ONLY, "type3/deg2", constants=consts, conditions_checked=checks)
    if _near_zero(c, 1.0, tols):
        fam = _bb_family(
            "binomial-cubic", "type3/deg2/c0", reduce_type2(0, P, tols=tols), tols, "energy integral",
            pole_branches=(lam,),
        )
        return ClassificationReport(ode, FAMILIES, "type3/deg2/c0", [fam], constants=consts, conditions_checked=checks)
    fams = []
    cc = complex(c)
    for (ei, ej) in ((e1, e2), (e2, e1)):
        v = cc * cc * complex(lam) - 25 * (complex(ei) - complex(ej))
        if _near_zero(v, _scale(cc * cc * lam, 25 * ei, 25 * ej), tols) and not _near_zero(ei - ej, 1.0, tols):
            fams.append(
                SolutionFamily(
                    "exp-elliptic-quadratic",
                    "type3/deg2/exp-elliptic",
                    {"zeta0": "complex", "g3": "complex"},
                    True,
                    cf.elliptic_exp_w2(ei, ej, cc),
                    pole_branches=(lam,),
                    notes=f"e_i = {_fmt(ei)}, e_j = {_fmt(ej)}; g3 = 0 is admitted (rational degenerate member)",
                )
            )
    return ClassificationReport(
        ode, FAMILIES if fams else CONSTANTS_ONLY, "type3/deg2/exp-elliptic", fams, constants=consts,
        conditions_checked=checks,
    )


def _fmt(x) -> str:
    x = complex(x)
    return f"{x.real:.17g}{x.imag:+.17g}j"


def _div(a, b):
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    return complex(a) / complex(b)


def _sign_tag(s: int) -> str:
    """Family-name suffix for the branch lam_s = s * lam (empty for s = +1)."""
    return "" if s > 0 else "[-lam]"


def _type3_cubic(ode, c, P, consts, tols) -> ClassificationReport:
    a3 = P[3]
    lam = _principal_sqrt(-2 / complex(a3))
    roots = roots_low_degree(PolyCoeffs([complex(x) for x in P]), tols=tols)
    q = [r for r, m in roots for _ in range(m)]
    if ode.normal_form.get("q") and ode.normal_form.get("lambda") is not None:
        lam_in = complex(ode.normal_form["lambda"])
        if abs(lam_in**2 - lam**2) <= 1e-9 * abs(lam) ** 2:
            lam = lam_in
            q = [complex(x) for x in ode.normal_form["q"]]
    ode = OdeSpec("Type3", tuple(P), c, {"lambda": lam, "q": tuple(q)})
    cc = complex(c)
    scale_q = _scale(*q, cc * lam)
    checks = []
    holds_s = {}
    for s in (1, -1):
        val = cubic_condition(s * lam, q, cc)
        ok = _near_zero(val, scale_q**3 * max(abs(cc), 1.0), tols)
        holds_s[s] = ok
        checks.append((f"c prod (c ({'+' if s > 0 else '-'}lam) + q_i + q_j - 2 q_k) = 0", val, ok))
    if not any(holds_s.values()):
        return ClassificationReport(ode, CONSTANTS_ONLY, "type3/deg3", constants=consts, conditions_checked=checks)
    if _near_zero(c, 1.0, tols):
        fam = _bb_family(
            "binomial-quartic", "type3/deg3/c0", reduce_type2(0, P, tols=tols), tols, "energy integral",
            pole_branches=(lam, -lam),
        )
        return ClassificationReport(ode, FAMILIES, "type3/deg3/c0", [fam], constants=consts, conditions_checked=checks)
    fams: list[SolutionFamily] = []
    seen = set()
    for s in (1, -1):
        lam_s = s * lam
        # arithmetic-progression roots with common difference delta = c lam_s / 3
        delta = cc * lam_s / 3
        for kmid in range(3):
            others = [q[n] for n in range(3) if n != kmid]
            qm = q[kmid]
            if any(abs(o - (qm + delta)) <= tols.zero * scale_q for o in others) and any(
                abs(o - (qm - delta)) <= tols.zero * scale_q for o in others
            ):
                key = ("w6", s)
                if key not in seen:
                    seen.add(key)
                    fams.append(
                        SolutionFamily(
                            "exp-elliptic-cubic" + _sign_tag(s),
                            "type3/deg3/exp-elliptic",
                            {"zeta0": "complex", "g2": "complex"},
                            True,
                            cf.elliptic_exp_w6(qm, delta, lam_s),
                            pole_branches=(lam, -lam),
                            notes=f"midpoint root {_fmt(qm)}, delta = c lam_s / 3 with lam_s = {_fmt(lam_s)}",
                        )
                    )
                break
        for m in range(3):
            ia, ib = [n for n in range(3) if n != m]
            qa, qb = q[ia], q[ib]
            if abs(cc * lam_s - (2 * q[m] - qa - qb)) > tols.zero * scale_q:
                continue
            rational = abs(qa - qb) <= tols.zero * scale_q
            if rational:
                qa = qb = (qa + qb) / 2
            key = ("w7", s, tuple(sorted([(round(qa.real, 9), round(qa.imag, 9)), (round(qb.real, 9), round(qb.imag, 9))])))
            if key in seen:
                continue
            seen.add(key)
            fams.append(
                SolutionFamily(
                    ("rational" if rational else "riccati") + _sign_tag(s),
                    "type3/deg3/rational" if rational else "type3/deg3/riccati",
                    {"z0": "complex"},
                    False,
                    cf.riccati_pair(qa, qb, lam_s),
                    pole_branches=(lam_s,),
                    notes=f"w' = -(w - {_fmt(qa)})(w - {_fmt(qb)}) / lam_s, lam_s = {_fmt(lam_s)}",
                )
            )
    label = "type3/deg3/exp-elliptic" if any(f.name.startswith("exp-elliptic") for f in fams) else "type3/deg3/riccati"
    return ClassificationReport(ode, FAMILIES, label, fams, constants=consts, conditions_checked=checks)


def classify(ode: OdeSpec, *, tols: Tolerances = DEFAULT) -> ClassificationReport:
    if ode.family == "Type1":
        rep = classify_type1(ode.P, tols=tols)
    elif ode.family == "Type2":
        rep = classify_type2(ode.c, ode.P, tols=tols)
    else:
        rep = classify_type3(ode.c, ode.P, tols=tols) if not ode.normal_form else _classify_type3_nf(ode, tols)
    return rep


def _classify_type3_nf(ode: OdeSpec, tols) -> ClassificationReport:
    P = _trim(ode.P)
    k = len(P) - 1
    consts = _constants(P, tols)
    if k == 2:
        return _type3_quadratic(ode, ode.c, P, consts, tols)
    if k == 3:
        return _type3_cubic(ode, ode.c, P, consts, tols)
    return classify_type3(ode.c, P, tols=tols)
