"""Safe evaluation of initial-data expressions over ``x``.

Expressions use Python syntax restricted to arithmetic, comparisons and a few
functions; they are parsed with :mod:`ast` and never passed to ``eval``.

>>> import numpy as np
>>> evaluate("8 - 0.05*cos(2*pi*x)", np.array([0.0, 0.5]))
array([7.95, 8.05])
>>> evaluate("piecewise(0.25 <= x <= 0.75, 8, 7)", np.array([0.1, 0.5]))
array([7., 8.])
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .errors import InvalidInputError

__all__ = ["compile_expression", "evaluate", "Expression"]

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_CMPOPS = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}
_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
    "exp": np.exp,
    "sqrt": np.sqrt,
}
_NAMES = {"pi": np.pi}
# names bound per evaluation; ``xc`` is the grid node nearest 0.5, which lets
# a cusp sit exactly on a node at every resolution
_GRID_NAMES = ("xc",)


class Expression:
    """Compiled expression; call with an array of ``x`` values."""

    def __init__(self, text: str):
        self.text = text
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as exc:
            raise InvalidInputError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self._check(tree.body)
        self.tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise InvalidInputError(f"unsupported constant {node.value!r}")
        elif isinstance(node, ast.Name):
            if node.id != "x" and node.id not in _NAMES and node.id not in _GRID_NAMES:
                raise InvalidInputError(f"unknown name {node.id!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise InvalidInputError(f"unsupported operator {type(node.op).__name__}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise InvalidInputError("unsupported unary operator")
            self._check(node.operand)
        elif isinstance(node, ast.Compare):
            if any(type(op) not in _CMPOPS for op in node.ops):
                raise InvalidInputError("only <, <=, >, >= comparisons are allowed")
            self._check(node.left)
            for c in node.comparators:
                self._check(c)
        elif isinstance(node, ast.BoolOp):
            for v in node.values:
                self._check(v)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                raise InvalidInputError("only plain function calls are allowed")
            name = node.func.id
            if name == "piecewise":
                if len(node.args) < 3 or len(node.args) % 2 == 0:
                    raise InvalidInputError("piecewise(cond1, value1, ..., default) needs an odd number >= 3 of arguments")
            elif name in _FUNCS:
                if len(node.args) != 1:
                    raise InvalidInputError(f"{name} takes one argument")
            else:
                raise InvalidInputError(f"unknown function {name!r}")
            for a in node.args:
                self._check(a)
        else:
            raise InvalidInputError(f"unsupported syntax {type(node).__name__}")

    def _eval(self, node, x, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "x":
                return x
            if node.id in _GRID_NAMES:
                return env[node.id]
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x, env), self._eval(node.right, x, env))
        if isinstance(node, ast.UnaryOp):
            val = self._eval(node.operand, x, env)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Compare):
            left = self._eval(node.left, x, env)
            result = True
            for op, comp in zip(node.ops, node.comparators):
                right = self._eval(comp, x, env)
                result = np.logical_and(result, _CMPOPS[type(op)](left, right))
                left = right
            return result
        if isinstance(node, ast.BoolOp):
            vals = [self._eval(v, x, env) for v in node.values]
            combine = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
            out = vals[0]
            for v in vals[1:]:
                out = combine(out, v)
            return out
        name = node.func.id
        args = [self._eval(a, x, env) for a in node.args]
        if name == "piecewise":
            conds = [np.broadcast_to(c, np.shape(x)).astype(bool) for c in args[:-1:2]]
            vals = [np.broadcast_to(v, np.shape(x)).astype(float) for v in args[1:-1:2]]
            return np.select(conds, vals, default=args[-1])
        return _FUNCS[name](args[0])

    def __call__(self, x, xc=None):
        """Evaluate at ``x``; ``xc`` defaults to the entry of ``x`` nearest 0.5."""
        x = np.asarray(x, dtype=float)
        if xc is None:
            xc = float(x.flat[np.argmin(np.abs(x - 0.5))]) if x.size else 0.5
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(self._eval(self.tree, x, {"xc": xc}), dtype=float), x.shape).copy()
        return out

    @property
    def uses_x(self) -> bool:
        return any(isinstance(n, ast.Name) and n.id == "x" for n in ast.walk(self.tree))

    def __repr__(self):
        return f"Expression({self.text!r})"


def compile_expression(text: str) -> Expression:
    return Expression(text)


def evaluate(text: str, x) -> np.ndarray:
    return Expression(text)(x)
