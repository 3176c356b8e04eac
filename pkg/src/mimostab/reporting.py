"""Shared helpers for JSON reports and CSV curve files."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .config import Tolerances
from .polyrat import RootSet


def clean_number(x, digits: int = 12):
    """JSON-safe, rounding-stable representation of a float."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return 0.0
    return float(f"{x:.{digits}g}")


def roots_to_list(roots: RootSet) -> list:
    return [
        {"re": clean_number(z.real), "im": clean_number(z.imag), "multiplicity": m}
        for z, m in roots.roots
    ]


def verdict_to_dict(v) -> dict:
    return {
        "status": str(v.status),
        "method": v.method,
        "witnesses": roots_to_list(v.witness_poles),
        "notes": list(v.notes),
    }


def tolerances_to_dict(tol: Tolerances) -> dict:
    return {k: clean_number(v) for k, v in sorted(vars(tol).items())}


def sanitize(obj):
    """Recursively convert numpy scalars, complex numbers and infinities."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return clean_number(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": clean_number(obj.real), "im": clean_number(obj.imag)}
    return obj


def dump_json(obj, path=None) -> str:
    text = json.dumps(sanitize(obj), indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def write_curve_csv(path, omegas, points, branch: int) -> None:
    write_curves_csv(path, [(omegas, points, branch)])


def write_curves_csv(path, curves) -> None:
    """Write ``(omegas, points, branch)`` triples under one header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega", "re", "im", "branch"])
        for omegas, points, branch in curves:
            for om, z in zip(omegas, points):
                w.writerow([_fmt(om), _fmt(z.real), _fmt(z.imag), branch])


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"
