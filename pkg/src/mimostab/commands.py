"""Analysis commands shared by the CLI and the corpus suite.

Each command takes parsed system descriptions plus options and returns a
JSON-ready report dictionary.  Curve files are written when ``curves_dir``
is given.
"""

from __future__ import annotations

import dataclasses
import warnings
from pathlib import Path

from .config import get_tolerances
from .nyquist import (
    build_grid,
    det_nyquist,
    eigen_loci,
    generalized_nyquist,
    merge_loci,
    siso_segment_check,
    uniform_margins,
    winding_number,
)
from .passivity import classify_pr, mixed_interconnect, passivity_interconnect
from .reporting import tolerances_to_dict, verdict_to_dict, write_curves_csv
from .robustness import (
    UncertaintyKind,
    perturbed_verdict,
    small_gain_check,
    uncertainty_bound,
)
from .smith_mcmillan import theorem1_check, unstable_pole_count
from .tfmatrix import TransferMatrix, direct_stability, tm_det

__all__ = ["AnalysisOptions", "COMMANDS", "run_command"]


@dataclasses.dataclass(frozen=True)
class AnalysisOptions:
    grid_points: int = 200
    omega_max: float | None = None
    curves_dir: Path | None = None


def _grid(P, opts):
    return build_grid(P, omega_max=opts.omega_max, base_points=opts.grid_points)


def _base(cmd, systems):
    return {
        "system": systems[0].name if len(systems) == 1 else [s.name for s in systems],
        "command": cmd,
        "tolerances": tolerances_to_dict(get_tolerances()),
    }


def _cross_check(verdict, P, U=None):
    oracle = direct_stability(P, U)
    return {"oracle": "direct", "oracle_status": str(oracle.status),
            "agrees": oracle.status == verdict.status}


def _curve_path(opts, name, suffix):
    return None if opts.curves_dir is None else Path(opts.curves_dir) / f"{name}_{suffix}.csv"


def cmd_stability(systems, opts):
    (desc,) = systems
    P = desc.matrix
    v = direct_stability(P)
    rep = _base("stability", systems)
    rep["verdict"] = verdict_to_dict(v)
    if P.is_square:
        t1, hidden = theorem1_check(P)
        rep["cross_check"] = {
            "method": "theorem1", "status": str(t1.status), "hidden_mode": hidden,
            "agrees": t1.status == v.status,
        }
        if not P.is_zero:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                rep["unstable_pole_count"] = unstable_pole_count(P).unstable_pole_count
    return rep


def cmd_theorem1(systems, opts):
    (desc,) = systems
    v, hidden = theorem1_check(desc.matrix)
    rep = _base("theorem1", systems)
    rep["verdict"] = verdict_to_dict(v)
    rep["hidden_mode"] = hidden
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep["unstable_pole_count"] = unstable_pole_count(desc.matrix).unstable_pole_count
    rep["cross_check"] = _cross_check(v, desc.matrix)
    return rep


def cmd_nyquist(systems, opts):
    (desc,) = systems
    P = desc.matrix
    curve, v = det_nyquist(P, _grid(P, opts))
    rep = _base("nyquist", systems)
    rep["verdict"] = verdict_to_dict(v)
    rep["winding"] = winding_number(curve, 0.0)
    rep["cross_check"] = _cross_check(v, P)
    path = _curve_path(opts, desc.name, "det")
    if path is not None:
        write_curves_csv(path, [(curve.omegas, curve.points, -1)])
        rep["curves"] = [str(path)]
    return rep


def cmd_gnc(systems, opts):
    (desc,) = systems
    P = desc.matrix
    grid = _grid(P, opts)
    loci = eigen_loci(P, grid)
    curves = merge_loci(loci)
    v = generalized_nyquist(P, grid)
    rep = _base("gnc", systems)
    rep["verdict"] = verdict_to_dict(v)
    tol = get_tolerances().closure
    rep["branches_closed"] = [
        bool(abs(b[-1] - b[0]) <= tol * max(1.0, abs(b[0]))) for b in loci.branches
    ]
    rep["merged_curves"] = [list(c.member_branches) for c in curves]
    try:
        rep["windings"] = [winding_number(c, -1.0) for c in curves]
    except Exception:  # a locus through -1 is already reported as Marginal
        rep["windings"] = None
    rep["cross_check"] = _cross_check(v, P)
    if opts.curves_dir is not None:
        p1 = _curve_path(opts, desc.name, "loci")
        p2 = _curve_path(opts, desc.name, "merged")
        write_curves_csv(p1, [(loci.omegas, b, i) for i, b in enumerate(loci.branches)])
        write_curves_csv(p2, [(c.omegas, c.points, i) for i, c in enumerate(curves)])
        rep["curves"] = [str(p1), str(p2)]
    return rep


def cmd_margins(systems, opts):
    (desc,) = systems
    P = desc.matrix
    m = uniform_margins(P, _grid(P, opts))
    rep = _base("margins", systems)
    rep["verdict"] = verdict_to_dict(direct_stability(P))
    rep["margins"] = m.to_dict()
    return rep


def cmd_smallgain(systems, opts):
    a, b = systems
    applies, norm, v = small_gain_check(a.matrix, b.matrix)
    rep = _base("smallgain", systems)
    rep["verdict"] = verdict_to_dict(v)
    rep["small_gain"] = {"applies": applies, "product_norm": norm}
    rep["cross_check"] = _cross_check(v, a.matrix, b.matrix) if applies else {
        "oracle": "direct", "oracle_status": str(direct_stability(a.matrix, b.matrix).status),
    }
    return rep


def cmd_bounds(systems, opts):
    (desc,) = systems
    P = desc.matrix
    rep = _base("bounds", systems)
    rep["verdict"] = verdict_to_dict(direct_stability(P))
    rep["bounds"] = {
        str(k): uncertainty_bound(P, k).bound
        for k in (UncertaintyKind.ADDITIVE, UncertaintyKind.MULTIPLICATIVE)
    }
    return rep


def cmd_passivity(systems, opts):
    (desc,) = systems
    rep = _base("passivity", systems)
    rep["passivity"] = classify_pr(desc.matrix).to_dict()
    return rep


def cmd_mixed(systems, opts):
    a, b = systems
    c, v = mixed_interconnect(a.matrix, b.matrix)
    rep = _base("mixed", systems)
    rep["verdict"] = verdict_to_dict(v)
    rep["common_c"] = c
    rep["cross_check"] = {
        "oracle": "direct", "oracle_status": str(direct_stability(a.matrix, b.matrix).status),
    }
    return rep


# commands used only by the corpus suite ------------------------------------

def cmd_same_det(systems, opts):
    a, b = (tm_det(TransferMatrix.identity(s.matrix.rows) + s.matrix) for s in systems)
    rep = _base("same_det", systems)
    rep["determinants"] = [str(a), str(b)]
    rep["equal"] = a.allclose(b)
    return rep


def cmd_perturbed(systems, opts):
    p, u = systems
    rep = _base("perturbed", systems)
    rep["verdict"] = verdict_to_dict(perturbed_verdict(p.matrix, u.matrix))
    return rep


def cmd_siso(systems, opts):
    (desc,) = systems
    crosses, on_seg = siso_segment_check(desc.matrix, _grid(desc.matrix, opts))
    rep = _base("siso", systems)
    rep["crosses_segment"] = crosses
    rep["limit_on_segment"] = on_seg
    rep["verdict"] = verdict_to_dict(direct_stability(desc.matrix))
    return rep


def cmd_passivity_loop(systems, opts):
    a, b = systems
    applies, v = passivity_interconnect(a.matrix, b.matrix)
    rep = _base("passivity_loop", systems)
    rep["theorem_applies"] = applies
    rep["theorem_verdict"] = verdict_to_dict(v)
    rep["verdict"] = verdict_to_dict(direct_stability(a.matrix, b.matrix))
    return rep


def cmd_diagonal_gains(systems, opts, gains=(0.1, 1.0, 10.0)):
    (desc,) = systems
    P = desc.matrix
    n = P.rows
    results = []
    for k1 in gains:
        for k2 in gains:
            diag = [k1, k2] + [1.0] * (n - 2)
            v = direct_stability(P, TransferMatrix.diag(diag[:n]))
            results.append({"gains": diag[:n], "status": str(v.status)})
    rep = _base("diagonal_gains", systems)
    rep["samples"] = results
    rep["all_stable"] = all(r["status"] == "Stable" for r in results)
    return rep


COMMANDS = {
    "stability": (cmd_stability, 1),
    "theorem1": (cmd_theorem1, 1),
    "nyquist": (cmd_nyquist, 1),
    "gnc": (cmd_gnc, 1),
    "margins": (cmd_margins, 1),
    "smallgain": (cmd_smallgain, 2),
    "bounds": (cmd_bounds, 1),
    "passivity": (cmd_passivity, 1),
    "mixed": (cmd_mixed, 2),
    "same_det": (cmd_same_det, 2),
    "perturbed": (cmd_perturbed, 2),
    "siso": (cmd_siso, 1),
    "passivity_loop": (cmd_passivity_loop, 2),
    "diagonal_gains": (cmd_diagonal_gains, 1),
}


def run_command(cmd: str, systems: list, opts: AnalysisOptions | None = None, **extra) -> dict:
    """Run ``cmd`` on the given system descriptions and return its report."""
    if cmd not in COMMANDS:
        raise ValueError(f"unknown command {cmd!r}")
    fn, arity = COMMANDS[cmd]
    if len(systems) != arity:
        raise ValueError(f"{cmd} takes {arity} system(s), got {len(systems)}")
    return fn(list(systems), opts or AnalysisOptions(), **extra)
