"""Tiny arithmetic grammar for target functions of ``x``.

Operators ``+ - * / ^`` (``^`` is power), functions ``exp pow sin cos sqrt`` and
the constant ``pi``.  Anything else is rejected before evaluation.
"""

import ast

import numpy as np

from lifs.errors import ValidationError

FUNCS = {"exp": np.exp, "pow": np.power, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}
CONSTS = {"pi": np.pi}
BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
          ast.Div: np.true_divide, ast.Pow: np.power}


def _check(node):
    if isinstance(node, ast.Expression):
        return _check(node.body)
    if isinstance(node, ast.BinOp) and type(node.op) in BINOPS:
        return _check(node.left) and _check(node.right)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        return _check(node.operand)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return True
    if isinstance(node, ast.Name) and (node.id == "x" or node.id in CONSTS):
        return True
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in FUNCS and not node.keywords):
        return all(_check(a) for a in node.args)
    raise ValidationError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")


def _eval(node, x):
    if isinstance(node, ast.BinOp):
        return BINOPS[type(node.op)](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, x)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return x if node.id == "x" else CONSTS[node.id]
    return FUNCS[node.func.id](*[_eval(a, x) for a in node.args])


class Expression:
    def __init__(self, text):
        self.text = text
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ValidationError(f"cannot parse expression {text!r}") from exc
        _check(tree)
        self.tree = tree.body

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(_eval(self.tree, x), x.shape).astype(float)

    def derivative(self, x, h=1e-20):
        """Complex-step derivative; exact to rounding for analytic expressions."""
        z = np.asarray(x, dtype=float) + 1j * h
        with np.errstate(all="ignore"):
            v = _eval(self.tree, z)
        return np.broadcast_to(np.imag(v) / h, z.shape).astype(float)


def parse(text):
    return Expression(text)


def parse_floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}") from exc
