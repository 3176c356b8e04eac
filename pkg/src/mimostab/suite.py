"""Built-in corpus of worked examples and its recorded expectations."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

from .commands import AnalysisOptions, run_command
from .systems import parse_system

__all__ = ["corpus_dir", "load_corpus_system", "load_expectations", "run_suite"]


def corpus_dir() -> Path:
    return Path(str(resources.files("mimostab") / "corpus"))


def load_corpus_system(name: str, **overrides):
    return parse_system(corpus_dir() / f"{name}.json", overrides=overrides or None)


def load_expectations() -> list:
    return json.loads((corpus_dir() / "expectations.json").read_text())["cases"]


def _witnesses_match(observed: list, expected: list, tol: float) -> bool:
    obs = [complex(w["re"], w["im"]) for w in observed]
    if len(obs) != len(expected):
        return False
    remaining = list(obs)
    for e in expected:
        z = complex(e["re"], e.get("im", 0.0))
        best = min(remaining, key=lambda o: abs(o - z), default=None)
        if best is None or abs(best - z) > tol:
            return False
        remaining.remove(best)
    return True


def compare(report: dict, expect: dict) -> list:
    """Return the list of mismatch descriptions (empty when all match)."""
    problems = []
    for key, want in expect.items():
        if key == "witness_tol":
            continue
        if key == "status":
            got = report["verdict"]["status"]
        elif key == "witnesses":
            got = report["verdict"]["witnesses"]
            if not _witnesses_match(got, want, expect.get("witness_tol", 1e-8)):
                problems.append(f"witnesses: expected {want}, got {got}")
            continue
        elif key == "curves":
            got = len(report["merged_curves"])
        elif key == "abs_winding":
            got = abs(sum(report["windings"] or [0]))
        elif key == "branches_closed":
            got = any(report["branches_closed"])
        elif key == "theta1_at_least":
            got = report["margins"]["theta1"]
            if not got >= want - 1e-9:
                problems.append(f"theta1 = {got} is below {want}")
            continue
        elif key in ("k1", "k2"):
            got = report["margins"][key]
        elif key == "tier":
            got = report["passivity"]["tier"]
        else:
            got = report.get(key)
        if isinstance(want, float) and isinstance(got, (int, float)):
            ok = math.isclose(got, want, rel_tol=1e-6, abs_tol=1e-9)
        else:
            ok = got == want
        if not ok:
            problems.append(f"{key}: expected {want!r}, got {got!r}")
    return problems


def run_suite(opts: AnalysisOptions | None = None) -> dict:
    """Run every corpus case; returns ``{"cases": [...], "passed": bool}``."""
    opts = opts or AnalysisOptions()
    results = []
    for case in load_expectations():
        systems = [load_corpus_system(name) for name in case["systems"]]
        extra = {"gains": tuple(case["gains"])} if "gains" in case else {}
        case_opts = opts if case.get("curves") else AnalysisOptions(opts.grid_points, opts.omega_max, None)
        try:
            report = run_command(case["command"], systems, case_opts, **extra)
            problems = compare(report, case["expect"])
        except Exception as exc:  # recorded as a mismatch, not a crash
            report, problems = None, [f"{type(exc).__name__}: {exc}"]
        results.append({
            "id": case["id"],
            "command": case["command"],
            "passed": not problems,
            "problems": problems,
            "report": report,
        })
    return {"cases": results, "passed": all(r["passed"] for r in results)}
