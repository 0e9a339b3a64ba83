"""Command-line entry point: ``meroode <command> --input job.json``.

Commands
--------
classify   existence verdict, conditions and families (symbolic parameters)
solve      classify, then bind every family's parameters from the seeded RNG
verify     solve, then report ODE residuals for every bound family
growth     Nevanlinna characteristic samples and growth fit for one family
painleve   dominant balances, Fuchs indices and resonance obstructions
bb         multiplicity pattern and closed-form solution of a binomial equation

Exit codes: 0 success, 2 malformed input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .briot_bouquet import bb_classify_roots, bb_solve
from .classify import ClassificationReport, classify, ode_to_dict
from .config import DEFAULT, Tolerances
from .errors import InputError, MeroodeError
from .local_analysis import dominant_balance, formal_expand, hayman_order_bound, hayman_terms, required_order
from .numerics import PolyCoeffs
from .ode import OdeSpec
from .reductions import BBEquation
from .solutions import expr as ex
from .solutions.serialize import SCHEMA_VERSION, canonical_dumps, decode_number, encode_number, to_json_obj
from .verify import QuadratureConfig, SamplingConfig, growth_bound_fit, residual_max

COMMANDS = ("classify", "solve", "verify", "growth", "painleve", "bb")
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


# -- input parsing ------------------------------------------------------------------


def _field(doc: dict, name: str, required: bool = True):
    if name not in doc:
        if required:
            raise InputError(f"field {name!r}: missing")
        return None
    return doc[name]


def _number(x, where: str):
    try:
        return decode_number(x)
    except InputError as exc:
        raise InputError(f"field {where!r}: {exc}") from None


def _numbers(xs, where: str) -> list:
    if not isinstance(xs, list):
        raise InputError(f"field {where!r}: expected a list of numbers")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(xs)]


def parse_ode(doc: dict) -> OdeSpec:
    """OdeSpec from the job document (see README for the schema)."""
    if not isinstance(doc, dict):
        raise InputError("top level: expected a JSON object")
    family = _field(doc, "family")
    if family not in ("Type1", "Type2", "Type3"):
        raise InputError(f"field 'family': expected Type1, Type2 or Type3, got {family!r}")
    c = _number(doc.get("c", 0), "c")
    if family == "Type1" and c != 0:
        raise InputError("field 'c': Type1 has no c parameter")
    nf = doc.get("normal_form")
    if nf is not None:
        if family != "Type3":
            raise InputError("field 'normal_form': only Type3 accepts a normal form")
        if not isinstance(nf, dict) or "lambda" not in nf:
            raise InputError("field 'normal_form': expected an object with 'lambda' and 'q' or 'e'")
        lam = _number(nf["lambda"], "normal_form.lambda")
        if lam == 0:
            raise InputError("field 'normal_form.lambda': must be nonzero")
        if "q" in nf:
            q = _numbers(nf["q"], "normal_form.q")
            if len(q) != 3:
                raise InputError("field 'normal_form.q': expected three roots")
            return OdeSpec.type3_cubic(lam, q, c)
        if "e" in nf:
            e = _numbers(nf["e"], "normal_form.e")
            if len(e) != 2:
                raise InputError("field 'normal_form.e': expected two roots")
            return OdeSpec.type3_quadratic(lam, e, c)
        raise InputError("field 'normal_form': expected 'q' (cubic) or 'e' (quadratic)")
    P = _numbers(_field(doc, "P"), "P")
    return OdeSpec(family, tuple(P), c)


def load_job(args) -> dict:
    if args.inline is not None:
        text, origin = args.inline, "<inline>"
    elif args.input is not None:
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
        origin = args.input
    else:
        raise InputError("no job given: use --input PATH or --inline JSON")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{origin}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and doc.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InputError(f"field 'schema': unsupported version {doc.get('schema')!r}")
    return doc


# -- commands -----------------------------------------------------------------------


def _tolerances(args) -> Tolerances:
    return DEFAULT if args.tol is None else DEFAULT.with_overrides(zero=args.tol)


def _header(args, command: str) -> dict:
    return {"schema": SCHEMA_VERSION, "command": command, "seed": args.seed, "version": __version__}


def _bound_families(rep: ClassificationReport, rng: np.random.Generator):
    for fam in rep.families:
        bindings = fam.sample_bindings(rng)
        yield fam, bindings, fam.instantiate(bindings)


def _encode_bindings(b: dict) -> dict:
    return {k: encode_number(v) for k, v in sorted(b.items())}


def cmd_classify(args, doc) -> dict:
    rep = classify(parse_ode(doc), tols=_tolerances(args))
    return {**_header(args, "classify"), "report": rep.to_dict()}


def cmd_solve(args, doc) -> dict:
    rep = classify(parse_ode(doc), tols=_tolerances(args))
    rng = np.random.default_rng(args.seed)
    inst = []
    for fam, b, e in _bound_families(rep, rng):
        inst.append({"family": fam.name, "bindings": _encode_bindings(b), "expr": to_json_obj(ex.bind(e, b))})
    return {**_header(args, "solve"), "report": rep.to_dict(), "instances": inst}


def cmd_verify(args, doc) -> dict:
    tols = _tolerances(args)
    ode = parse_ode(doc)
    rep = classify(ode, tols=tols)
    rng = np.random.default_rng(args.seed)
    draws = int(doc.get("draws", 10))
    rows = []
    for fam in rep.families:
        worst, skipped = 0.0, 0
        for d in range(draws):
            b = fam.sample_bindings(rng)
            rr = residual_max(
                rep.ode, fam.instantiate(b), b,
                SamplingConfig(n_points=args.grid_points, seed=int(rng.integers(2**31))), tols=tols,
            )
            worst = max(worst, rr.max_relative_residual)
            skipped += rr.skipped_near_poles
        rows.append({"family": fam.name, "draws": draws, "max_relative_residual": worst, "skipped_near_poles": skipped})
    return {**_header(args, "verify"), "report": rep.to_dict(), "residuals": rows}


def cmd_growth(args, doc) -> tuple[dict, str]:
    tols = _tolerances(args)
    rep = classify(parse_ode(doc), tols=tols)
    if not rep.families:
        raise InputError(f"verdict {rep.verdict}: no family to sample")
    want = doc.get("family_name")
    fams = [f for f in rep.families if want is None or f.name == want]
    if not fams:
        raise InputError(f"field 'family_name': {want!r} not among {rep.family_names()}")
    fam = fams[0]
    rng = np.random.default_rng(args.seed)
    b = fam.sample_bindings(rng)
    for k, v in (doc.get("bindings") or {}).items():
        b[k] = _number(v, f"bindings.{k}")
    e = fam.instantiate(b)
    grid = np.linspace(1.0, args.r_max, args.grid_points)
    est = growth_bound_fit(e, grid, b, QuadratureConfig(pole_method=args.pole_method))
    a, bb, c, n = est.fitted
    out = {
        **_header(args, "growth"),
        "report": rep.to_dict(),
        "family": fam.name,
        "bindings": _encode_bindings(b),
        "pole_method": args.pole_method,
        "fitted": {"a": a, "b": bb, "c": c, "n": n},
        "order_estimate": est.order_estimate if np.isfinite(est.order_estimate) else "inf",
        "samples": [{"r": s.r, "m": s.m, "N": s.N, "T": s.T} for s in est.samples],
    }
    return out, est.to_csv()


def cmd_painleve(args, doc) -> dict:
    ode = parse_ode(doc)
    order = int(doc.get("order", 6))
    exact = all(isinstance(x, (int, Fraction)) for x in (*ode.P, ode.c))
    branches = []
    for br in dominant_balance(ode, exact=exact):
        full = formal_expand(ode, br, max(order, required_order(ode, br)))
        branches.append(
            {
                "p": full.p,
                "leading_coeff": encode_number(full.leading_coeff),
                "fuchs_indices": list(full.fuchs_indices),
                "obstructions": [{"index": i, "value": encode_number(v)} for i, v in full.obstructions],
                "flags": list(full.flags),
            }
        )
    h = hayman_order_bound(hayman_terms(ode))
    return {
        **_header(args, "painleve"),
        "ode": ode_to_dict(ode),
        "branches": branches,
        "hayman": {"applicable": h.applicable, "bound": h.bound},
    }


def cmd_bb(args, doc) -> dict:
    tols = _tolerances(args)
    if "coefficients" in doc:
        eq = BBEquation.from_poly(PolyCoeffs(_numbers(doc["coefficients"], "coefficients")), tols=tols)
    elif "roots" in doc:
        a_k = _number(_field(doc, "a_k"), "a_k")
        roots = []
        for i, item in enumerate(doc["roots"]):
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[1], int) and item[1] >= 1):
                raise InputError(f"field 'roots[{i}]': expected [root, multiplicity]")
            roots.append((complex(_number(item[0], f"roots[{i}][0]")), item[1]))
        from .briot_bouquet import bb_from_roots

        eq = bb_from_roots(complex(a_k), roots, tols=tols)
    else:
        raise InputError("bb job needs 'coefficients' or 'a_k' with 'roots'")
    pat = bb_classify_roots(eq, tols=tols)
    e = bb_solve(eq, branch=int(doc.get("branch", 1)), tols=tols)
    return {
        **_header(args, "bb"),
        "k": pat.k,
        "pattern": pat.pattern,
        "a_k": encode_number(eq.a_k),
        "roots": [[encode_number(r), m] for r, m in pat.roots],
        "solution": to_json_obj(e),
        "free_params": sorted(ex.params_of(e)),
    }


# -- driver -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="meroode", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"meroode {__version__}")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="job JSON file")
    src.add_argument("--inline", help="job JSON given on the command line")
    p.add_argument("--output", help="report path (stdout when omitted); growth also writes <output>.csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None, help="override the zero-test tolerance")
    p.add_argument("--r-max", type=float, default=6.0)
    p.add_argument("--grid-points", type=int, default=32)
    p.add_argument("--pole-method", choices=("lattice", "argument", "both"), default="lattice")
    return p


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        doc = load_job(args)
        handler = {
            "classify": cmd_classify,
            "solve": cmd_solve,
            "verify": cmd_verify,
            "growth": cmd_growth,
            "painleve": cmd_painleve,
            "bb": cmd_bb,
        }[args.command]
        result = handler(args, doc)
    except InputError as exc:
        print(f"meroode: input error: {exc}", file=stderr)
        return EXIT_INPUT
    except MeroodeError as exc:
        print(f"meroode: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    csv_text = None
    if isinstance(result, tuple):
        result, csv_text = result
    text = canonical_dumps(result)
    if args.output:
        out = Path(args.output)
        out.write_text(text)
        if csv_text is not None:
            out.with_suffix(".csv").write_text(csv_text)
    else:
        stdout.write(text)
        if csv_text is not None:
            stdout.write(csv_text)
    return EXIT_OK


def main() -> None:  # pragma: no cover - console entry point
    sys.exit(run())
