"""Closed-form solution trees, their serialisation and pole inventories."""

from .expr import (
    Expr,
    Z,
    add,
    const,
    cos,
    cosh,
    coth,
    eval_jet,
    evaluate,
    exp,
    mul,
    param,
    params_of,
    power,
    sin,
    sinh,
    substitute,
    wp,
    wp_prime,
    wzeta,
)
from .serialize import canonical_dumps, dumps_expr, from_json_obj, loads_expr, to_json_obj

__all__ = [
    "Expr", "Z", "add", "const", "cos", "cosh", "coth", "eval_jet", "evaluate", "exp", "mul",
    "param", "params_of", "power", "sin", "sinh", "substitute", "wp", "wp_prime", "wzeta",
    "canonical_dumps", "dumps_expr", "from_json_obj", "loads_expr", "to_json_obj",
]
