"""Safe arithmetic expressions for fields and forces.

Grammar: numbers, the variables allowed by the caller (x1, x2, x3 ...),
constants ``pi`` and ``e``, operators ``+ - * / **`` and parentheses, and
the functions sin cos tan exp log sqrt abs sinh cosh tanh atan
``Piecewise`` and ``Heaviside``, plus comparison operators inside
Piecewise conditions. Anything else (attributes, subscripts, names
outside this list) is rejected before sympy ever sees the string.
"""
from __future__ import annotations

import ast

import numpy as np
import sympy as sp

from .errors import ConfigError

FUNCTIONS = {
    "sin": sp.sin, "cos": sp.cos, "tan": sp.tan, "exp": sp.exp, "log": sp.log,
    "sqrt": sp.sqrt, "abs": sp.Abs, "sinh": sp.sinh, "cosh": sp.cosh,
    "tanh": sp.tanh, "atan": sp.atan, "Piecewise": sp.Piecewise,
    "Heaviside": sp.Heaviside, "Max": sp.Max, "Min": sp.Min,
}
CONSTANTS = {"pi": sp.pi, "e": sp.E}
SYMBOLS = {name: sp.Symbol(name, real=True) for name in ("x1", "x2", "x3", "X1", "X2", "X3")}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load,
    ast.Call, ast.Tuple, ast.Compare, ast.BoolOp,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
    ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.And, ast.Or,
)


def parse(text, variables=("x1", "x2", "x3")) -> sp.Expr:
    """Parse ``text`` into a sympy expression over ``variables``."""
    if isinstance(text, sp.Basic):
        return text
    if isinstance(text, (int, float)):
        return sp.Float(text) if isinstance(text, float) else sp.Integer(text)
    if not isinstance(text, str):
        raise ConfigError(f"expression must be a string or number, got {type(text).__name__}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from None
    names = {}
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigError(f"expression {text!r}: construct {type(node).__name__} not allowed")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in FUNCTIONS):
            raise ConfigError(f"expression {text!r}: only {sorted(FUNCTIONS)} may be called")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"expression {text!r}: only numeric literals allowed")
        if isinstance(node, ast.Name):
            if node.id in FUNCTIONS:
                names[node.id] = FUNCTIONS[node.id]
            elif node.id in CONSTANTS:
                names[node.id] = CONSTANTS[node.id]
            elif node.id in variables:
                names[node.id] = SYMBOLS[node.id]
            else:
                raise ConfigError(
                    f"expression {text!r}: unknown name {node.id!r} (variables: {', '.join(variables)})")
    return _build(tree.body, names)


def _build(node, names):
    if isinstance(node, ast.Constant):
        v = node.value
        return sp.Integer(v) if isinstance(v, int) else sp.Float(repr(v))
    if isinstance(node, ast.Name):
        return names[node.id]
    if isinstance(node, ast.UnaryOp):
        v = _build(node.operand, names)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _build(node.left, names), _build(node.right, names)
        op = node.op
        if isinstance(op, ast.Add):
            return a + b
        if isinstance(op, ast.Sub):
            return a - b
        if isinstance(op, ast.Mult):
            return a * b
        if isinstance(op, ast.Div):
            return a / b
        return a**b
    if isinstance(node, ast.Tuple):
        return tuple(_build(e, names) for e in node.elts)
    if isinstance(node, ast.Compare):
        if len(node.ops) != 1:
            a = _build(node.left, names)
            parts = []
            for op, comp in zip(node.ops, node.comparators):
                b = _build(comp, names)
                parts.append(_cmp(op, a, b))
                a = b
            return sp.And(*parts)
        return _cmp(node.ops[0], _build(node.left, names), _build(node.comparators[0], names))
    if isinstance(node, ast.BoolOp):
        vals = [_build(v, names) for v in node.values]
        return sp.And(*vals) if isinstance(node.op, ast.And) else sp.Or(*vals)
    if isinstance(node, ast.Call):
        fn = names[node.func.id]
        args = [_build(a, names) for a in node.args]
        if fn is sp.Piecewise:
            return sp.Piecewise(*[tuple(a) for a in args])
        return fn(*args)
    raise ConfigError(f"unsupported construct {type(node).__name__}")  # pragma: no cover


def _cmp(op, a, b):
    if isinstance(op, ast.Lt):
        return sp.Lt(a, b)
    if isinstance(op, ast.LtE):
        return sp.Le(a, b)
    if isinstance(op, ast.Gt):
        return sp.Gt(a, b)
    return sp.Ge(a, b)


def lambdify(expr: sp.Expr, variables):
    """numpy callable for ``expr``; constants broadcast to the input shape."""
    syms = [SYMBOLS[v] for v in variables]
    fn = sp.lambdify(syms, expr, modules="numpy")
    if expr.free_symbols & set(syms):
        def f(*args):
            out = fn(*args)
            return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(*args).shape).copy()
    else:
        c = float(expr)

        def f(*args):
            return np.full(np.broadcast(*args).shape, c)
    return f
