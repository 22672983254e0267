"""Concrete 32-bit two's-complement expression semantics."""

from __future__ import annotations

from typing import Mapping, Union

from .frontend import ast as A

BITS = 32
INT_MIN = -(2 ** (BITS - 1))
INT_MAX = 2 ** (BITS - 1) - 1
_MOD = 2 ** BITS

Value = Union[int, bool]


class DivisionByZero(ArithmeticError):
    pass


def wrap(v: int) -> int:
    """Reduce an integer to the signed 32-bit range."""
    v &= _MOD - 1
    return v - _MOD if v > INT_MAX else v


def c_div(a: int, b: int) -> int:
    """C division: truncates toward zero."""
    if b == 0:
        raise DivisionByZero
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a: int, b: int) -> int:
    """C remainder: takes the sign of the dividend."""
    return a - b * c_div(a, b)


def eval_expr(e: A.Expr, env: Mapping[str, Value], wrapping: bool = True) -> Value:
    """Evaluate ``e``; with ``wrapping`` off, integers are unbounded."""
    w = wrap if wrapping else (lambda v: v)
    if isinstance(e, A.IntLit):
        return e.value
    if isinstance(e, A.BoolLit):
        return e.value
    if isinstance(e, A.Var):
        return env[e.name]
    if isinstance(e, A.Unary):
        v = eval_expr(e.operand, env, wrapping)
        return (not v) if e.op == "!" else w(-v)
    if isinstance(e, A.Binary):
        op = e.op
        if op == "&&":
            return bool(eval_expr(e.left, env, wrapping)) and bool(eval_expr(e.right, env, wrapping))
        if op == "||":
            return bool(eval_expr(e.left, env, wrapping)) or bool(eval_expr(e.right, env, wrapping))
        a = eval_expr(e.left, env, wrapping)
        b = eval_expr(e.right, env, wrapping)
        if op == "+":
            return w(a + b)
        if op == "-":
            return w(a - b)
        if op == "*":
            return w(a * b)
        if op == "/":
            return w(c_div(a, b))
        if op == "%":
            return w(c_mod(a, b))
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
    raise TypeError(f"cannot evaluate {e!r}")


def to_type(v: int, ty: str) -> Value:
    return bool(v) if ty == A.BOOL else wrap(int(v))
