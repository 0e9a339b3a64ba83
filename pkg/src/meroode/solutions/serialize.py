"""JSON encoding of expression trees (schema version 1).

Every node is an object with an ``"op"`` tag:

=========  ===============================================================
op         fields
=========  ===============================================================
const      ``value``: number, ``[re, im]`` pair, or ``"p/q"`` rational string
z          (none)
param      ``name``: string
add, mul   ``args``: list of nodes
pow        ``base``: node, ``n``: integer
exp        ``arg``: node
wp, wpp,   ``arg``, ``g2``, ``g3``: nodes
zeta
=========  ===============================================================

:func:`canonical_dumps` writes any JSON-compatible document with sorted keys
and every float in the 17-significant-digit ``.17g`` format, so identical
inputs give byte-identical output.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

from ..errors import InputError
from .expr import (
    WP,
    Add,
    Const,
    Exp,
    Expr,
    Mul,
    Param,
    Pow,
    Var,
    WPPrime,
    WZeta,
    add,
    exp,
    mul,
    power,
)

SCHEMA_VERSION = 1

_WEIERSTRASS = {"wp": WP, "wpp": WPPrime, "zeta": WZeta}


def encode_number(v):
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    v = complex(v)
    if v.imag == 0:
        return float(v.real)
    return [float(v.real), float(v.imag)]


def decode_number(x):
    if isinstance(x, bool):
        raise InputError("boolean where a number was expected")
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return complex(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            pass
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise InputError(f"cannot parse number {x!r}") from exc
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, dict) and set(x) == {"re", "im"}:
        return complex(float(x["re"]), float(x["im"]))
    raise InputError(f"cannot parse number {x!r}")


def to_json_obj(e: Expr) -> dict:
    if isinstance(e, Const):
        return {"op": "const", "value": encode_number(e.value)}
    if isinstance(e, Var):
        return {"op": "z"}
    if isinstance(e, Param):
        return {"op": "param", "name": e.name}
    if isinstance(e, Add):
        return {"op": "add", "args": [to_json_obj(a) for a in e.args]}
    if isinstance(e, Mul):
        return {"op": "mul", "args": [to_json_obj(a) for a in e.args]}
    if isinstance(e, Pow):
        return {"op": "pow", "base": to_json_obj(e.base), "n": e.n}
    if isinstance(e, Exp):
        return {"op": "exp", "arg": to_json_obj(e.arg)}
    for tag, cls in _WEIERSTRASS.items():
        if type(e) is cls:
            return {"op": tag, "arg": to_json_obj(e.arg), "g2": to_json_obj(e.g2), "g3": to_json_obj(e.g3)}
    raise TypeError(f"cannot serialise {type(e).__name__}")


def from_json_obj(obj) -> Expr:
    if not isinstance(obj, dict) or "op" not in obj:
        raise InputError(f"expression node must be an object with 'op', got {obj!r}")
    op = obj["op"]
    try:
        if op == "const":
            return Const(decode_number(obj["value"]))
        if op == "z":
            return Var()
        if op == "param":
            return Param(str(obj["name"]))
        if op == "add":
            return add(*(from_json_obj(a) for a in obj["args"]))
        if op == "mul":
            return mul(*(from_json_obj(a) for a in obj["args"]))
        if op == "pow":
            return power(from_json_obj(obj["base"]), int(obj["n"]))
        if op == "exp":
            return exp(from_json_obj(obj["arg"]))
        if op in _WEIERSTRASS:
            return _WEIERSTRASS[op](from_json_obj(obj["arg"]), from_json_obj(obj["g2"]), from_json_obj(obj["g3"]))
    except KeyError as exc:
        raise InputError(f"node {op!r} is missing field {exc.args[0]!r}") from exc
    raise InputError(f"unknown expression op {op!r}")


def dumps_expr(e: Expr) -> str:
    return canonical_dumps({"schema": SCHEMA_VERSION, "expr": to_json_obj(e)})


def loads_expr(text: str) -> Expr:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA_VERSION:
        raise InputError(f"unsupported schema {doc.get('schema')!r}")
    return from_json_obj(doc["expr"])


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # not valid JSON numbers; keep them visible rather than crash
        return json.dumps(str(x))
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def canonical_dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, ``.17g`` floats, fixed indentation."""

    def enc(o, level: int) -> str:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, (complex, Fraction)):
            return enc(encode_number(o), level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(o[k], level + 1)}" for k in sorted(o, key=str)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in o):
                return "[" + ", ".join(enc(x, level) for x in o) + "]"
            return "[\n" + ",\n".join(pad + enc(x, level + 1) for x in o) + "\n" + end + "]"
        if hasattr(o, "item"):  # numpy scalars
            return enc(o.item(), level)
        raise TypeError(f"cannot encode {type(o).__name__}")

    return enc(obj, 0) + "\n"
