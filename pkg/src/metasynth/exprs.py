"""Arbitrary-precision real expressions for amplitudes and precisions.

Inputs such as ``"0.25"``, ``"-cos(pi/9)/sqrt(2)"`` or ``"3^-9.53"`` are
parsed once and can then be evaluated at any precision, either as mpmath
floats or as mpmath intervals. Re-evaluating from the source string is what
lets the geometry code escalate precision without stale constants.
"""

from __future__ import annotations

import ast
import contextlib
import math
from fractions import Fraction
from typing import Any, Iterator

from mpmath import iv, mp

_FUNCS = ("sqrt", "cos", "sin", "exp", "log", "tan")
_CONSTS = ("pi",)


class ExprError(ValueError):
    pass


@contextlib.contextmanager
def precision(bits: int) -> Iterator[None]:
    """Set mp and iv working precision together."""
    old_mp, old_iv = mp.prec, iv.prec
    mp.prec, iv.prec = bits, bits
    try:
        yield
    finally:
        mp.prec, iv.prec = old_mp, old_iv


def _validate(node: ast.AST) -> None:
    for sub in ast.walk(node):
        if isinstance(sub, ast.Call):
            if not isinstance(sub.func, ast.Name) or sub.func.id not in _FUNCS or len(sub.args) != 1:
                raise ExprError(f"unsupported call in expression: {ast.dump(sub.func)}")
        elif isinstance(sub, ast.Name):
            if sub.id not in _FUNCS + _CONSTS:
                raise ExprError(f"unknown name {sub.id!r}")
        elif isinstance(sub, ast.Constant):
            if not isinstance(sub.value, (int, float)) or isinstance(sub.value, bool):
                raise ExprError(f"unsupported literal {sub.value!r}")
        elif not isinstance(
            sub,
            (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Add, ast.Sub, ast.Mult, ast.Div,
             ast.Pow, ast.USub, ast.UAdd, ast.Load),
        ):
            raise ExprError(f"unsupported syntax {type(sub).__name__}")


class RealExpr:
    """A parsed real-valued expression."""

    __slots__ = ("source", "_tree")

    def __init__(self, source: str | int | Fraction | RealExpr) -> None:
        if isinstance(source, RealExpr):
            source = source.source
        if isinstance(source, Fraction):
            source = f"{source.numerator}/{source.denominator}"
        self.source = str(source).strip()
        text = self.source.replace("^", "**")
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ExprError(f"cannot parse {self.source!r}") from exc
        _validate(tree)
        self._tree = tree

    def __repr__(self) -> str:
        return f"RealExpr({self.source!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RealExpr) and other.source == self.source

    def __hash__(self) -> int:
        return hash(self.source)

    def evaluate(self, ctx: Any = mp) -> Any:
        """Evaluate in ``ctx`` (``mp`` or ``iv``) at its current precision."""
        return _Evaluator(ctx, self.source).visit(self._tree.body)

    def mpf(self, bits: int) -> Any:
        with precision(bits):
            return +self.evaluate(mp)

    def interval(self, bits: int) -> Any:
        with precision(bits):
            return self.evaluate(iv)

    def exact(self) -> Fraction | None:
        """The value as a Fraction when the expression is rational arithmetic."""
        try:
            return _exact(self._tree.body)
        except _NotExact:
            return None


class _NotExact(Exception):
    pass


def _exact(node: ast.AST) -> Fraction:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, float):
            raise _NotExact
        return Fraction(node.value)
    if isinstance(node, ast.UnaryOp):
        v = _exact(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        lhs, rhs = _exact(node.left), _exact(node.right)
        if isinstance(node.op, ast.Add):
            return lhs + rhs
        if isinstance(node.op, ast.Sub):
            return lhs - rhs
        if isinstance(node.op, ast.Mult):
            return lhs * rhs
        if isinstance(node.op, ast.Div):
            return lhs / rhs
        if isinstance(node.op, ast.Pow) and rhs.denominator == 1:
            return lhs ** int(rhs)
    raise _NotExact


class _Evaluator:
    def __init__(self, ctx: Any, source: str) -> None:
        self.ctx = ctx
        self.source = source

    def visit(self, node: ast.AST) -> Any:
        ctx = self.ctx
        if isinstance(node, ast.Constant):
            # take the literal's decimal text, never the binary float
            seg = ast.get_source_segment(self.source.replace("^", "**"), node)
            return ctx.mpf(seg if seg is not None else repr(node.value))
        if isinstance(node, ast.Name):
            return ctx.pi
        if isinstance(node, ast.Call):
            return getattr(ctx, node.func.id)(self.visit(node.args[0]))
        if isinstance(node, ast.UnaryOp):
            v = self.visit(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        lhs = self.visit(node.left)
        if isinstance(node.op, ast.Pow):
            exp_exact = _maybe_int(node.right)
            if exp_exact is not None:
                return lhs**exp_exact if exp_exact >= 0 else 1 / lhs ** (-exp_exact)
            return ctx.exp(ctx.log(lhs) * self.visit(node.right))
        rhs = self.visit(node.right)
        if isinstance(node.op, ast.Add):
            return lhs + rhs
        if isinstance(node.op, ast.Sub):
            return lhs - rhs
        if isinstance(node.op, ast.Mult):
            return lhs * rhs
        return lhs / rhs


def _maybe_int(node: ast.AST) -> int | None:
    try:
        v = _exact(node)
    except _NotExact:
        return None
    return int(v) if v.denominator == 1 else None


def as_expr(x: str | int | Fraction | RealExpr) -> RealExpr:
    return x if isinstance(x, RealExpr) else RealExpr(x)


def log3(x: Any) -> Any:
    return mp.log(x) / mp.log(3)


def interval_compare(lhs: Any, rhs: Any) -> bool | None:
    """True if lhs > rhs surely, False if lhs <= rhs surely, None if unsure."""
    if lhs.a > rhs.b:
        return True
    if lhs.b <= rhs.a:
        return False
    return None


def bits_for_epsilon(eps: float) -> int:
    """Default working precision ceil(4*log2(1/eps)) + 128 bits."""
    return max(math.ceil(4 * math.log2(1 / eps)), 0) + 128
