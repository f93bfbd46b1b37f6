"""Small vectorized expression language for loads and gaps.

Grammar: numbers, the variables t, x, y, nx, ny, the constant pi, + - * / **,
comparisons (< <= > >= == !=, giving 1.0 or 0.0), parentheses, the step H[expr]
(1 at 0), and the functions tanh, sqrt, exp, log, sin, cos, abs, min, max.
sqrt of a negative argument gives 0, so branches switched off by H stay finite.
"""
from __future__ import annotations

import ast
import math
import operator

import numpy as np

from .errors import ScenarioError

VARIABLES = ("t", "x", "y", "nx", "ny")

_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow}
_CMP = {ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt, ast.GtE: operator.ge,
        ast.Eq: operator.eq, ast.NotEq: operator.ne}


def _sqrt(v):
    return np.sqrt(np.maximum(v, 0.0))


_FUN = {"tanh": np.tanh, "sqrt": _sqrt, "exp": np.exp, "log": np.log, "sin": np.sin,
        "cos": np.cos, "abs": np.abs, "min": np.minimum, "max": np.maximum}


class Expression:
    """Parsed expression; call with keyword arrays for the variables it uses."""

    def __init__(self, text: str):
        self.text = str(text).strip()
        if not self.text:
            raise ScenarioError("empty expression")
        src = self.text.replace("^", "**")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ScenarioError(f"cannot parse expression {self.text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ScenarioError(f"unsupported constant in {self.text!r}")
        elif isinstance(node, ast.Name):
            if node.id not in VARIABLES and node.id != "pi":
                raise ScenarioError(f"unknown variable {node.id!r} in {self.text!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BIN:
                raise ScenarioError(f"unsupported operator in {self.text!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ScenarioError(f"unsupported unary operator in {self.text!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Compare):
            if any(type(o) not in _CMP for o in node.ops):
                raise ScenarioError(f"unsupported comparison in {self.text!r}")
            self._check(node.left)
            for c in node.comparators:
                self._check(c)
        elif isinstance(node, ast.Subscript):
            if not (isinstance(node.value, ast.Name) and node.value.id == "H"):
                raise ScenarioError(f"only H[...] may be subscripted in {self.text!r}")
            self._check(node.slice)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUN) or node.keywords:
                raise ScenarioError(f"unsupported function call in {self.text!r}")
            want = 2 if node.func.id in ("min", "max") else 1
            if len(node.args) != want:
                raise ScenarioError(f"{node.func.id} takes {want} argument(s) in {self.text!r}")
            for a in node.args:
                self._check(a)
        else:
            raise ScenarioError(f"unsupported syntax {type(node).__name__} in {self.text!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return math.pi if node.id == "pi" else env[node.id]
        if isinstance(node, ast.BinOp):
            return _BIN[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Compare):
            left = self._eval(node.left, env)
            out = True
            for op, comp in zip(node.ops, node.comparators):
                right = self._eval(comp, env)
                out = np.logical_and(out, _CMP[type(op)](left, right))
                left = right
            return np.where(out, 1.0, 0.0)
        if isinstance(node, ast.Subscript):
            return np.where(np.asarray(self._eval(node.slice, env)) >= 0.0, 1.0, 0.0)
        return _FUN[node.func.id](*(self._eval(a, env) for a in node.args))

    def __call__(self, **env):
        full = {k: env.get(k, 0.0) for k in VARIABLES}
        shape = np.broadcast(*[np.asarray(v) for v in full.values()]).shape
        with np.errstate(all="ignore"):
            v = self._eval(self._tree, full)
        return np.broadcast_to(np.asarray(v, dtype=float), shape).copy()

    def is_zero(self) -> bool:
        return isinstance(self._tree, ast.Constant) and float(self._tree.value) == 0.0

    def __eq__(self, other):
        return isinstance(other, Expression) and other.text == self.text

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return f"Expression({self.text!r})"
