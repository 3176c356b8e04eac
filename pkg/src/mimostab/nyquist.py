"""Nyquist-type tests: determinant curve, eigenvalue loci, merged closed
curves, winding numbers and uniform gain/phase margins.

Orientation convention: frequencies run from ``-inf`` to ``+inf`` and
windings are counted counter-clockwise positive.  Imaginary-axis poles of
the plant are bypassed by a small semicircle into the right half plane, so
they count as stable open-loop poles.
"""

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import get_tolerances
from .exceptions import (
    ClosureFailure,
    CurvePassesThroughOrigin,
    EigenSolveFailure,
    ImproperSystem,
    NominalUnstable,
    NotSquare,
    PointOnCurve,
)
from .polyrat import RootSet
from .smith_mcmillan import unstable_pole_count
from .tfmatrix import Status, TransferMatrix, Verdict, direct_stability, tm_det

__all__ = [
    "FrequencyGrid",
    "LocusSet",
    "ClosedCurve",
    "MarginReport",
    "build_grid",
    "det_nyquist",
    "eigen_loci",
    "merge_loci",
    "winding_number",
    "generalized_nyquist",
    "uniform_margins",
    "siso_segment_check",
    "margin_samples",
]

_ARC_POINTS = 17
_MAX_PASSES = 16
_MAX_POINTS = 100_000
# eigenvalues closer than this (times matrix scale) are treated as one
# (possibly defective) multiple eigenvalue and replaced by their mean
_EIG_MERGE = 10 * math.sqrt(np.finfo(float).eps)


@dataclasses.dataclass(frozen=True)
class FrequencyGrid:
    """Sample points of the Nyquist contour.

    ``s`` holds the contour points; on the imaginary axis ``s = j*omega``,
    on an indentation arc ``omega`` is the imaginary part of ``s``.
    """

    omegas: np.ndarray
    s: np.ndarray
    indent_radius: float
    arc_center: np.ndarray  # nan on the axis, pole frequency on arcs
    arc_angle: np.ndarray

    def __len__(self):
        return len(self.omegas)


@dataclasses.dataclass(frozen=True)
class LocusSet:
    """Continuously ordered eigenvalue branches.

    ``branches[i]`` runs over ``omegas`` whose first and last entries are
    ``-inf`` and ``+inf`` (the limit points).  ``permutation_at_infinity[i]``
    is the branch whose start continues the end of branch ``i``.
    """

    branches: np.ndarray
    omegas: np.ndarray
    permutation_at_infinity: tuple


@dataclasses.dataclass(frozen=True)
class ClosedCurve:
    points: np.ndarray
    member_branches: tuple
    omegas: np.ndarray | None = None

    @property
    def gap(self) -> float:
        return float(abs(self.points[-1] - self.points[0]))


@dataclasses.dataclass(frozen=True)
class MarginReport:
    """Uniform gain interval ``(k1, k2)`` and phase margin ``theta1``.

    ``k1 == 0`` with ``k1_zero_limit`` set means no lower critical gain
    exists (stable down to vanishing gain).
    """

    k1: float
    k2: float
    theta1: float
    per_curve: tuple
    k1_zero_limit: bool = False

    def to_dict(self) -> dict:
        def num(x):
            return "inf" if math.isinf(x) else float(x)

        return {
            "k1": "0-limit" if self.k1_zero_limit else num(self.k1),
            "k2": num(self.k2),
            "theta1": float(self.theta1),
            "per_curve": [
                {"k1": num(a), "k2": num(b), "theta1": float(c)} for a, b, c in self.per_curve
            ],
        }


# ---------------------------------------------------------------------------
# evaluation helpers
# ---------------------------------------------------------------------------

def _require_square(P):
    if not P.is_square:
        raise NotSquare(f"expected a square transfer matrix, got {P.shape}")


def _limit(P: TransferMatrix) -> np.ndarray:
    if not P.is_proper:
        raise ImproperSystem("Nyquist analysis needs a proper transfer matrix")
    return P.value_at_infinity()


def _merge_close(eigs: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Replace clusters of near-equal eigenvalues by their mean (in place)."""
    n = eigs.shape[1]
    if n < 2:
        return eigs
    rad = _EIG_MERGE * (scale + 1.0)
    for i, j in itertools.combinations(range(n), 2):
        close = np.abs(eigs[:, i] - eigs[:, j]) <= rad
        if np.any(close):
            m = 0.5 * (eigs[close, i] + eigs[close, j])
            eigs[close, i] = m
            eigs[close, j] = m
    return eigs


def _eigenvalues(vals: np.ndarray, omegas=None) -> np.ndarray:
    try:
        eigs = np.linalg.eigvals(vals)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(f"eigenvalue solve failed: {exc}") from exc
    bad = ~np.all(np.isfinite(eigs), axis=-1)
    if np.any(bad):
        w = None if omegas is None else float(np.asarray(omegas)[bad][0])
        raise EigenSolveFailure(f"non-finite eigenvalues at omega = {w}", omega=w)
    scale = np.linalg.norm(vals.reshape(len(vals), -1), axis=1)
    return _merge_close(eigs.astype(complex), scale)


def _match(eigs: np.ndarray) -> np.ndarray:
    """Order eigenvalues so each column is continuous along the first axis.

    Each step picks the permutation of the next eigenvalue set with the
    smallest total distance to the current one.
    """
    K, n = eigs.shape
    if n == 1 or K < 2:
        return eigs.copy()
    perms = np.array(list(itertools.permutations(range(n))))
    out = np.empty_like(eigs)
    out[0] = eigs[0]
    for k in range(1, K):
        cand = eigs[k][perms]
        cost = np.abs(cand - out[k - 1]).sum(axis=1)
        out[k] = cand[np.argmin(cost)]
    return out


def _assign(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Permutation p minimising sum |src[i] - dst[p[i]]|, identity on ties."""
    n = len(src)
    cost = np.abs(src[:, None] - dst[None, :])
    cost = cost + 1e-12 * (1 - np.eye(n)) * (1 + cost.max())
    rows, cols = linear_sum_assignment(cost)
    p = np.empty(n, dtype=int)
    p[rows] = cols
    return p


def _dist_to_polyline(points: np.ndarray, z: complex) -> float:
    a, b = points[:-1], points[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    t = np.where(denom > 0, np.real((z - a) * np.conj(ab)) / np.where(denom > 0, denom, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * ab
    return float(np.min(np.abs(proj - z))) if len(a) else float(abs(points[0] - z))


def _winding(points: np.ndarray, z: complex) -> float:
    d = points - z
    return float(np.sum(np.angle(d[1:] / d[:-1])) / (2 * np.pi))


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

def _feature_scale(P: TransferMatrix):
    mags = []
    for e in P:
        for rs in (e.poles() if e.den.degree else RootSet(), e.zeros() if e.num.degree else RootSet()):
            mags.extend(abs(z) for z in rs.locations if abs(z) > 0)
    if not mags:
        return 1.0, 1.0
    return min(mags), max(mags)


def _axis_pole_frequencies(P: TransferMatrix, tau: float) -> list:
    out = []
    for z, _ in P.poles().marginal(tau):
        w = float(z.imag)
        if all(abs(w - v) > 1e-12 for v in out):
            out.append(w)
    return sorted(out)


def _assemble(omegas, r, axis_poles):
    keep = np.ones(len(omegas), dtype=bool)
    for w0 in axis_poles:
        keep &= np.abs(omegas - w0) >= r
    om = [omegas[keep]]
    s = [1j * omegas[keep]]
    centers = [np.full(keep.sum(), np.nan)]
    angles = [np.full(keep.sum(), np.nan)]
    phi = np.linspace(-np.pi / 2, np.pi / 2, _ARC_POINTS)
    for w0 in axis_poles:
        om.append(w0 + r * np.sin(phi))
        s.append(1j * w0 + r * np.exp(1j * phi))
        centers.append(np.full(len(phi), w0))
        angles.append(phi.copy())
    om, s = np.concatenate(om), np.concatenate(s)
    centers, angles = np.concatenate(centers), np.concatenate(angles)
    # arc endpoints share their omega with nothing else; ties broken by angle
    order = np.lexsort((np.nan_to_num(angles), om))
    return om[order], s[order], centers[order], angles[order]


def _midpoints(grid_om, grid_s, centers, angles, idx):
    a, b = idx, idx + 1
    same_arc = (~np.isnan(centers[a])) & (centers[a] == centers[b])
    mid_om = 0.5 * (grid_om[a] + grid_om[b])
    mid_s = 1j * mid_om
    mid_c = np.full(len(idx), np.nan)
    mid_phi = np.full(len(idx), np.nan)
    if np.any(same_arc):
        phi = 0.5 * (angles[a][same_arc] + angles[b][same_arc])
        w0 = centers[a][same_arc]
        r = np.abs(grid_s[a][same_arc] - 1j * w0)
        mid_s[same_arc] = 1j * w0 + r * np.exp(1j * phi)
        mid_om[same_arc] = w0 + r * np.sin(phi)
        mid_c[same_arc] = w0
        mid_phi[same_arc] = phi
    return mid_om, mid_s, mid_c, mid_phi


def _flag_segments(P: TransferMatrix, s, omegas, threshold):
    vals = P.freqresp(s)
    n = P.rows
    eigs = _match(_eigenvalues(vals, omegas))
    det = np.linalg.det(np.eye(n)[None] + vals)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    floor = 1e-9 * scale
    step = np.abs(np.diff(eigs, axis=0))
    crit = np.minimum(np.abs(1 + eigs[:-1]), np.abs(1 + eigs[1:]))
    mag = np.maximum(np.minimum(np.abs(eigs[:-1]), np.abs(eigs[1:])), 1e-3 * scale)
    flag = np.any(step > threshold * np.maximum(crit, floor), axis=1)
    flag |= np.any(step > threshold * mag, axis=1)
    if n > 1:
        sep = np.full(len(eigs), np.inf)
        for i, j in itertools.combinations(range(n), 2):
            d = np.abs(eigs[:, i] - eigs[:, j])
            d = np.where(d == 0, np.inf, d)
            sep = np.minimum(sep, d)
        flag |= np.any(step > threshold * np.maximum(sep[:-1, None], floor), axis=1)
    dstep = np.abs(np.diff(det))
    dscale = max(1.0, float(np.max(np.abs(det))))
    dcrit = np.minimum(np.abs(det[:-1]), np.abs(det[1:]))
    flag |= dstep > threshold * np.maximum(dcrit, 1e-9 * dscale)
    return np.flatnonzero(flag)


def build_grid(
    P: TransferMatrix,
    omega_max: float | None = None,
    base_points: int = 200,
    *,
    indent_radius: float | None = None,
    threshold: float = 0.1,
    refine: bool = True,
    max_points: int = _MAX_POINTS,
) -> FrequencyGrid:
    """Symmetric log-spaced contour grid with adaptive refinement.

    Points within ``indent_radius`` of an imaginary-axis pole are replaced
    by a semicircular arc into the right half plane.  Segments along which
    an eigenvalue or ``det(I+P)`` moves by more than ``threshold`` times its
    local scale (magnitude, distance to the critical point, eigenvalue
    separation) are bisected until none remain.
    """
    if base_points < 16:
        raise ValueError("base_points must be at least 16")
    tol = get_tolerances()
    r = tol.indent if indent_radius is None else indent_radius
    lo, hi = _feature_scale(P)
    if omega_max is None:
        omega_max = 1e3 * max(1.0, hi)
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    wmin = min(1e-3 * lo, 1e-2 * omega_max, 1e-3)
    pos = np.geomspace(wmin, omega_max, base_points)
    omegas = np.concatenate([-pos[::-1], [0.0], pos])
    axis_poles = _axis_pole_frequencies(P, tol.marginal)
    om, s, centers, angles = _assemble(omegas, r, axis_poles)
    symmetric = P.is_real
    if refine and P.is_square:
        for _ in range(_MAX_PASSES):
            idx = _flag_segments(P, s, om, threshold)
            if len(idx) == 0 or len(om) >= max_points:
                break
            m_om, m_s, m_c, m_phi = _midpoints(om, s, centers, angles, idx)
            if symmetric:
                mirror = ~np.isin(np.round(-m_om, 14), np.round(m_om, 14))
                m_om = np.concatenate([m_om, -m_om[mirror]])
                m_s = np.concatenate([m_s, np.conj(m_s[mirror])])
                m_c = np.concatenate([m_c, -m_c[mirror]])
                m_phi = np.concatenate([m_phi, -m_phi[mirror]])
            om = np.concatenate([om, m_om])
            s = np.concatenate([s, m_s])
            centers = np.concatenate([centers, m_c])
            angles = np.concatenate([angles, m_phi])
            order = np.lexsort((np.nan_to_num(angles), om))
            om, s, centers, angles = om[order], s[order], centers[order], angles[order]
            keep = np.concatenate([[True], (np.diff(om) > 0) | (np.abs(np.diff(s)) > 0)])
            om, s, centers, angles = om[keep], s[keep], centers[keep], angles[keep]
    return FrequencyGrid(om, s, r, centers, angles)


# ---------------------------------------------------------------------------
# determinant curve and eigenvalue loci
# ---------------------------------------------------------------------------

def _open_loop_count(P: TransferMatrix) -> int:
    import warnings

    if P.is_zero:
        return 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return unstable_pole_count(P).unstable_pole_count


def _unstable_witnesses(P: TransferMatrix) -> RootSet:
    """Right-half-plane zeros of det(I+P), falling back to unstable poles of P."""
    det = tm_det(TransferMatrix.identity(P.rows) + P)
    zeros = det.zeros().closed_rhp()
    if len(zeros):
        return zeros
    return P.poles().unstable()


def winding_number(curve: ClosedCurve | np.ndarray, point: complex = 0.0) -> int:
    """Counter-clockwise winding number of a closed curve about ``point``."""
    pts = curve.points if isinstance(curve, ClosedCurve) else np.asarray(curve, dtype=complex)
    tol = get_tolerances().winding
    dist = _dist_to_polyline(pts, point)
    if dist <= tol:
        raise PointOnCurve(f"curve passes within {dist:.3g} of {point}", distance=dist)
    if abs(pts[-1] - pts[0]) > get_tolerances().closure * max(1.0, abs(pts[0])):
        raise ClosureFailure("winding number requested for an open curve")
    return int(round(_winding(pts, point)))


def det_nyquist(P: TransferMatrix, grid: FrequencyGrid | None = None):
    """Nyquist curve of ``det(I+P(s))`` and the encirclement verdict.

    Stable iff the counter-clockwise winding about 0 equals the number of
    unstable poles of ``P`` (McMillan multiplicity).
    """
    _require_square(P)
    grid = build_grid(P) if grid is None else grid
    n = P.rows
    vals = P.freqresp(grid.s)
    dets = np.linalg.det(np.eye(n)[None] + vals)
    d_inf = np.linalg.det(np.eye(n) + _limit(P))
    pts = np.concatenate([[d_inf], dets, [d_inf]])
    omegas = np.concatenate([[-np.inf], grid.omegas, [np.inf]])
    curve = ClosedCurve(pts, (-1,), omegas)
    try:
        w = winding_number(curve, 0.0)
    except PointOnCurve as exc:
        raise CurvePassesThroughOrigin(
            f"det(I+P) passes within {exc.distance:.3g} of the origin; closed loop is marginal",
            distance=exc.distance,
        ) from exc
    count = _open_loop_count(P)
    notes = (f"winding about 0: {w}", f"unstable open-loop poles: {count}")
    if w == count:
        return curve, Verdict(Status.STABLE, RootSet(), "det-nyquist", notes)
    return curve, Verdict(Status.UNSTABLE, _unstable_witnesses(P), "det-nyquist", notes)


def eigen_loci(P: TransferMatrix, grid: FrequencyGrid | None = None) -> LocusSet:
    """Eigenvalues of ``P`` along the contour, continuously ordered."""
    _require_square(P)
    grid = build_grid(P) if grid is None else grid
    vals = P.freqresp(grid.s)
    eigs = _match(_eigenvalues(vals, grid.omegas))
    D = _limit(P)
    lim = _eigenvalues(D[None])[0]
    first = lim[_assign(eigs[0], lim)]
    last = lim[_assign(eigs[-1], lim)]
    branches = np.concatenate([first[None], eigs, last[None]]).T.copy()
    perm = _assign(branches[:, -1], branches[:, 0])
    omegas = np.concatenate([[-np.inf], grid.omegas, [np.inf]])
    return LocusSet(branches, omegas, tuple(int(p) for p in perm))


def merge_loci(loci: LocusSet) -> list:
    """Join open eigenvalue branches into closed curves.

    Branches are concatenated along the cycles of the endpoint permutation;
    a branch that closes on itself becomes its own curve.
    """
    tol = get_tolerances().closure
    perm = loci.permutation_at_infinity
    seen, curves = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        cycle, i = [], start
        while i not in seen:
            seen.add(i)
            cycle.append(i)
            i = perm[i]
        for a in cycle:
            b = perm[a]
            gap = abs(loci.branches[a][-1] - loci.branches[b][0])
            if gap > tol * max(1.0, abs(loci.branches[b][0])):
                raise ClosureFailure(f"branch {a} ends {gap:.3g} away from branch {b}")
        pts = np.concatenate([loci.branches[k] for k in cycle])
        oms = np.concatenate([loci.omegas for _ in cycle])
        curves.append(ClosedCurve(pts, tuple(cycle), oms))
    return curves


def generalized_nyquist(P: TransferMatrix, grid: FrequencyGrid | None = None) -> Verdict:
    """Encirclements of -1 by the merged eigenvalue curves."""
    _require_square(P)
    grid = build_grid(P) if grid is None else grid
    curves = merge_loci(eigen_loci(P, grid))
    try:
        total = sum(winding_number(c, -1.0) for c in curves)
    except PointOnCurve as exc:
        return Verdict(
            Status.MARGINAL, RootSet(), "generalized-nyquist",
            (f"an eigenvalue locus passes within {exc.distance:.3g} of -1",),
        )
    count = _open_loop_count(P)
    notes = (
        f"{len(curves)} closed curve(s)",
        f"winding about -1: {total}",
        f"unstable open-loop poles: {count}",
    )
    if total == count:
        return Verdict(Status.STABLE, RootSet(), "generalized-nyquist", notes)
    return Verdict(Status.UNSTABLE, _unstable_witnesses(P), "generalized-nyquist", notes)


# ---------------------------------------------------------------------------
# margins
# ---------------------------------------------------------------------------

def _real_axis_crossings(pts: np.ndarray) -> np.ndarray:
    im, re = pts.imag, pts.real
    out = list(re[im == 0])
    a, b = im[:-1], im[1:]
    idx = np.flatnonzero(a * b < 0)
    t = a[idx] / (a[idx] - b[idx])
    out.extend(re[idx] + t * (re[idx + 1] - re[idx]))
    return np.array(out, dtype=float)


def _unit_circle_crossings(pts: np.ndarray) -> np.ndarray:
    f = np.abs(pts) - 1.0
    out = list(pts[f == 0])
    a, b = f[:-1], f[1:]
    idx = np.flatnonzero(a * b < 0)
    t = a[idx] / (a[idx] - b[idx])
    out.extend(pts[idx] + t * (pts[idx + 1] - pts[idx]))
    return np.array(out, dtype=complex)


def _curve_margins(pts: np.ndarray):
    x = _real_axis_crossings(pts)
    gains = -1.0 / x[x < 0]
    below = gains[gains < 1.0]
    above = gains[gains > 1.0]
    k1 = float(below.max()) if len(below) else 0.0
    k2 = float(above.min()) if len(above) else math.inf
    c = _unit_circle_crossings(pts)
    if len(c):
        theta = np.abs(np.angle(-1.0 / c))
        theta1 = float(theta.min())
    else:
        theta1 = math.pi
    return k1, k2, theta1


def uniform_margins(P: TransferMatrix, grid: FrequencyGrid | None = None) -> MarginReport:
    """Gain interval and phase margin for ``U = k I`` and ``U = exp(j theta) I``.

    Each merged eigenvalue curve gives critical gains ``-1/x`` from its
    negative real-axis crossings ``x`` and critical phases from its
    unit-circle crossings; the curves are combined by max / min / min.
    """
    _require_square(P)
    nominal = direct_stability(P)
    if not nominal.is_stable:
        raise NominalUnstable(f"nominal loop is {nominal.status}")
    grid = build_grid(P) if grid is None else grid
    curves = merge_loci(eigen_loci(P, grid))
    per_curve = tuple(_curve_margins(c.points) for c in curves)
    k1 = max(k for k, _, _ in per_curve)
    k2 = min(k for _, k, _ in per_curve)
    theta1 = min(t for _, _, t in per_curve)
    return MarginReport(k1, k2, theta1, per_curve, k1_zero_limit=(k1 == 0.0))


def margin_samples(report: MarginReport, count: int = 20, *, k_cap: float = 1e3):
    """Gains strictly inside ``(k1, k2)`` and phases strictly inside
    ``(-theta1, theta1)`` for sampled validation."""
    lo = report.k1 if report.k1 > 0 else 1e-3
    hi = report.k2 if math.isfinite(report.k2) else k_cap
    frac = (np.arange(count) + 0.5) / count
    gains = np.exp(np.log(lo) + frac * (np.log(hi) - np.log(lo)))
    thetas = report.theta1 * (2 * frac - 1) * 0.999
    return gains, thetas


# ---------------------------------------------------------------------------
# SISO conveniences
# ---------------------------------------------------------------------------

def siso_segment_check(P: TransferMatrix, grid: FrequencyGrid | None = None):
    """Whether the SISO Nyquist curve meets ``(-inf, -1)``.

    Returns ``(crosses_segment, limit_on_segment)``: the first reports
    crossings at finite frequency, the second whether the limit
    ``P(j*inf)`` itself lies on the segment.
    """
    if P.shape != (1, 1):
        raise NotSquare("siso_segment_check needs a 1x1 system")
    grid = build_grid(P) if grid is None else grid
    pts = P.freqresp(grid.s)[:, 0, 0]
    x = _real_axis_crossings(pts)
    crosses = bool(np.any(x < -1.0))
    lim = complex(_limit(P)[0, 0])
    on_segment = abs(lim.imag) <= get_tolerances().winding and lim.real < -1.0
    return crosses, bool(on_segment)
