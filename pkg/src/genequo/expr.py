"""Tiny arithmetic expression interpreter for problem-spec files.

Supports +, -, *, /, ** (powers), unary minus, numeric literals, declared
variable names, and the functions abs, sin, cos, exp.  Expressions are parsed
once into an AST, validated against a whitelist, and evaluated without any
host-language callback, so spec files stay reproducible and inert.
"""

from __future__ import annotations

import ast
import math
from typing import Callable, Mapping, Sequence

_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "abs": abs,
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


class ExpressionError(ValueError):
    """The expression uses syntax outside the supported grammar."""


def _validate(node: ast.AST, variables: frozenset[str]) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body, variables)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _validate(node.left, variables)
        _validate(node.right, variables)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _validate(node.operand, variables)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ExpressionError("only abs, sin, cos, exp may be called")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError("functions take exactly one positional argument")
        _validate(node.args[0], variables)
    elif isinstance(node, ast.Name):
        if node.id not in variables:
            raise ExpressionError(f"unknown variable {node.id!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError("only numeric literals are allowed")
    else:
        raise ExpressionError(f"syntax {type(node).__name__} not allowed")


def _evaluate(node: ast.AST, env: Mapping[str, float]) -> float:
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, env)
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_evaluate(node.left, env),
                                      _evaluate(node.right, env))
    if isinstance(node, ast.UnaryOp):
        v = _evaluate(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call):
        return _FUNCTIONS[node.func.id](_evaluate(node.args[0], env))
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.Constant):
        return float(node.value)
    raise ExpressionError(f"syntax {type(node).__name__} not allowed")


def compile_expression(source: str, variables: Sequence[str]) -> Callable[..., float]:
    """Compile a restricted arithmetic expression into f(*values) -> float.

    ``variables`` fixes the argument order; the returned callable takes one
    float per variable.
    """
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression: {exc}") from None
    names = frozenset(variables)
    _validate(tree, names)
    order = list(variables)

    def fn(*values: float) -> float:
        if len(values) != len(order):
            raise TypeError(f"expected {len(order)} values, got {len(values)}")
        env = dict(zip(order, (float(v) for v in values)))
        return float(_evaluate(tree, env))

    fn.__doc__ = f"expression {source!r} over {order}"
    return fn


def vector_variables(dim: int) -> list[str]:
    """Conventional coordinate names x1..xn for a domain of the given dimension."""
    return [f"x{i + 1}" for i in range(dim)]
