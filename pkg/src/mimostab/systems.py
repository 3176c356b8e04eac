"""JSON system-description files.

Schema::

    {"name": "...", "rows": 2, "cols": 2,
     "parameters": {"b": 100},
     "entries": [[{"num": [1], "den": [1, 1]}, ...], ...]}

Coefficients are ascending in ``s``.  Each coefficient is a number, a
``{"re": .., "im": ..}`` object, or an arithmetic expression string over
the declared parameters (``"b"``, ``"-b"``, ``"(b-4)/(b+4)"``).
"""

from __future__ import annotations

import ast
import dataclasses
import json
import math
import operator
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ValidationError
from .polyrat import Polynomial, RationalFunction
from .tfmatrix import TransferMatrix

__all__ = ["SystemDescription", "parse_system", "load_system", "system_to_dict", "evaluate_expression"]

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_CONSTANTS = {"pi": math.pi}


@dataclasses.dataclass(frozen=True)
class SystemDescription:
    name: str
    matrix: TransferMatrix
    parameters: dict = dataclasses.field(default_factory=dict)


def evaluate_expression(text: str, parameters: dict) -> float:
    """Evaluate an arithmetic expression over named parameters."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"malformed expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in parameters:
                return parameters[node.id]
            if node.id in _CONSTANTS:
                return _CONSTANTS[node.id]
            raise ValueError(f"unknown parameter {node.id!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported syntax in {text!r}")

    return ev(tree)


def _coefficient(value, params, where):
    if isinstance(value, bool):
        raise ParseError(f"{where}: boolean is not a coefficient")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return evaluate_expression(value, params)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: {exc}") from exc
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(
            _coefficient(value.get("re", 0.0), params, where),
            _coefficient(value.get("im", 0.0), params, where),
        )
    raise ParseError(f"{where}: expected a number or expression, got {value!r}")


def _coefficients(values, params, where):
    if not isinstance(values, list) or not values:
        raise ParseError(f"{where}: expected a nonempty coefficient list")
    return [_coefficient(v, params, f"{where}[{k}]") for k, v in enumerate(values)]


def system_from_dict(data: dict, *, overrides: dict | None = None, source: str = "<data>") -> SystemDescription:
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    params = dict(data.get("parameters") or {})
    if not isinstance(params, dict):
        raise ParseError(f"{source}: 'parameters' must be an object")
    params.update(overrides or {})
    for k, v in params.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{source}: parameters.{k} must be a real number")
    entries = data.get("entries")
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"{source}: 'entries' must be a nonempty list of rows")
    width = None
    rows = []
    for i, row in enumerate(entries):
        if not isinstance(row, list) or not row:
            raise ValidationError(f"{source}: entries[{i}] is not a nonempty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(f"{source}: ragged grid (row {i} has {len(row)} entries, expected {width})")
        out_row = []
        for j, cell in enumerate(row):
            where = f"{source}: entries[{i}][{j}]"
            if not isinstance(cell, dict) or "num" not in cell or "den" not in cell:
                raise ParseError(f"{where}: expected an object with 'num' and 'den'")
            num = _coefficients(cell["num"], params, where + ".num")
            den = _coefficients(cell["den"], params, where + ".den")
            if all(c == 0 for c in den):
                raise ValidationError(f"{where}.den: zero denominator")
            out_row.append(RationalFunction(Polynomial(num), Polynomial(den)))
        rows.append(out_row)
    if "rows" in data and data["rows"] != len(rows):
        raise ValidationError(f"{source}: 'rows' is {data['rows']} but the grid has {len(rows)}")
    if "cols" in data and data["cols"] != width:
        raise ValidationError(f"{source}: 'cols' is {data['cols']} but the grid has {width}")
    name = str(data.get("name", Path(source).stem))
    return SystemDescription(name, TransferMatrix(rows), params)


def parse_system(path, *, overrides: dict | None = None) -> SystemDescription:
    """Read and validate a system file, substituting parameters."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return system_from_dict(data, overrides=overrides, source=str(path))


load_system = parse_system


def _coef_json(c):
    c = complex(c)
    if c.imag == 0:
        return float(c.real)
    return {"re": float(c.real), "im": float(c.imag)}


def system_to_dict(desc: SystemDescription) -> dict:
    """Numeric (parameter-free) description of the reduced matrix."""
    P = desc.matrix
    return {
        "name": desc.name,
        "rows": P.rows,
        "cols": P.cols,
        "entries": [
            [
                {
                    "num": [_coef_json(c) for c in np.atleast_1d(e.num.coefficients)],
                    "den": [_coef_json(c) for c in np.atleast_1d(e.den.coefficients)],
                }
                for e in row
            ]
            for row in P.entries
        ],
    }
