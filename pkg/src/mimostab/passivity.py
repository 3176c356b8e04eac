"""Positive-real classification and passivity-type interconnection tests.

Tiers, weakest first: ``NotPR < PR < StrongQuotedPR < StrictlyPR <
StronglyPR``.  ``StrongQuotedPR`` is the "strong" positive-real notion: no
closed right-half-plane poles and ``G(jw) + G(jw)^H > 0`` at every finite
frequency.  A tier is only assigned after every weaker tier's checks have
passed, so the implication chain holds by construction.

Minimality of the underlying realization is assumed; coprime entries are
the only evidence of it this module has.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .config import get_tolerances
from .exceptions import (
    DimensionMismatch,
    ImproperSystem,
    NotSquare,
    RepeatedAxisPole,
    UnstableOperand,
)
from .polyrat import Polynomial, RootSet, poly_roots
from .robustness import sigma_max
from .smith_mcmillan import _poly_det, common_denominator
from .tfmatrix import Status, TransferMatrix, Verdict

__all__ = [
    "PRTier",
    "PassivityClass",
    "MixedReport",
    "hermitian_min_eig",
    "classify_pr",
    "passivity_interconnect",
    "mixed_check",
    "mixed_interconnect",
]

# relative noise floor when reading the sign of an eigenvalue at a point
# where the Hermitian part is known to be nonsingular
_SIGN_RTOL = 1e-13
# a root of the Hermitian determinant counts as real if this close to the axis
_REAL_ROOT_RTOL = 1e-6
# the epsilon search stops this many halvings below its starting value;
# beyond that the negative lobe of a shifted "strong" PR function sinks
# under rounding noise
_EPS_HALVINGS = 20


class PRTier(enum.IntEnum):
    NOT_PR = 0
    PR = 1
    STRONG_QUOTED_PR = 2
    STRICTLY_PR = 3
    STRONGLY_PR = 4

    @property
    def label(self) -> str:
        return {
            0: "NotPR", 1: "PR", 2: "StrongQuotedPR", 3: "StrictlyPR", 4: "StronglyPR",
        }[self.value]

    def __str__(self) -> str:
        return self.label


@dataclasses.dataclass(frozen=True)
class PassivityClass:
    tier: PRTier
    witnesses: dict

    def at_least(self, tier: PRTier) -> bool:
        return self.tier >= tier

    def to_dict(self) -> dict:
        return {"tier": self.tier.label, "witnesses": _jsonable(self.witnesses)}


@dataclasses.dataclass(frozen=True)
class MixedReport:
    c: float
    pr_band_ok: bool
    gain_band_ok: bool

    @property
    def ok(self) -> bool:
        return self.pr_band_ok and self.gain_band_ok


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, complex):
            out[k] = {"re": v.real, "im": v.imag}
        elif isinstance(v, float) and math.isinf(v):
            out[k] = "inf"
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# Hermitian part
# ---------------------------------------------------------------------------

def _hermitian_eigs(G: TransferMatrix, omegas) -> np.ndarray:
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    vals = G.freqresp(1j * omegas)
    herm = vals + np.conj(np.swapaxes(vals, 1, 2))
    return np.linalg.eigvalsh(herm), np.linalg.norm(vals.reshape(len(vals), -1), axis=1)


def hermitian_min_eig(G: TransferMatrix, omega: float) -> float:
    """Smallest eigenvalue of ``G(jw) + G(jw)^H``; ``omega=inf`` gives the limit."""
    if math.isinf(omega):
        D = G.value_at_infinity()
        return float(np.linalg.eigvalsh(D + D.conj().T)[0])
    eigs, _ = _hermitian_eigs(G, [omega])
    return float(eigs[0, 0])


def _on_axis(p: Polynomial) -> Polynomial:
    """Coefficients of ``p(j*w)`` as a polynomial in real ``w``."""
    c = p.coefficients.astype(complex)
    return Polynomial(c * (1j ** np.arange(len(c))))


def _hermitian_det(G: TransferMatrix) -> Polynomial:
    """``det`` of ``|d|^2 (G + G^H)`` on the axis, a real polynomial in w."""
    N, d = common_denominator(G)
    n = G.rows
    dw = _on_axis(d)
    dwc = dw.conj()
    Nw = [[_on_axis(p) for p in row] for row in N]
    M = [[Nw[i][k] * dwc + Nw[k][i].conj() * dw for k in range(n)] for i in range(n)]
    det = _poly_det(M)
    return Polynomial(np.real(det.coefficients))


def _test_points(G: TransferMatrix):
    """Real roots of the Hermitian determinant and one point per interval.

    Returns ``(roots, interior, identically_zero)``.
    """
    det = _hermitian_det(G)
    scale = float(np.max(np.abs(det.coefficients))) if not det.is_zero else 0.0
    if det.is_zero or scale == 0 or np.max(np.abs(det.coefficients[1:]), initial=0) < 1e-13 * scale and abs(det.coefficients[0]) < 1e-13 * scale:
        return np.array([]), np.array([]), True
    if det.degree == 0:
        return np.array([]), np.array([0.0, 1.0]), False
    roots = [
        z.real for z, _ in poly_roots(det).roots
        if abs(z.imag) <= _REAL_ROOT_RTOL * max(1.0, abs(z))
    ]
    roots = np.unique(np.round(np.array(sorted(roots), dtype=float), 12))
    if len(roots) == 0:
        return roots, np.array([0.0, 1.0]), False
    pad = max(1.0, float(np.max(np.abs(roots))))
    interior = np.concatenate([
        [roots[0] - pad], 0.5 * (roots[1:] + roots[:-1]), [roots[-1] + pad],
    ])
    return roots, interior, False


def _axis_pole_freqs(G: TransferMatrix, tau: float) -> list:
    return [z.imag for z, _ in G.poles().marginal(tau)]


def _hermitian_condition(G: TransferMatrix, strict: bool):
    """Check ``G(jw)+G(jw)^H >= 0`` (or ``> 0`` if ``strict``) over finite w.

    Returns ``(ok, failing_frequency, min_eig_seen)``.
    """
    tol = get_tolerances()
    roots, interior, degenerate = _test_points(G)
    poles = _axis_pole_freqs(G, tol.marginal)

    def usable(w):
        return all(abs(w - p) > 1e-6 * max(1.0, abs(p)) for p in poles)

    if degenerate:
        # Hermitian part singular everywhere: fall back to a dense grid
        grid = np.concatenate([-np.geomspace(1e-3, 1e4, 400)[::-1], [0.0], np.geomspace(1e-3, 1e4, 400)])
        interior, roots = np.array([w for w in grid if usable(w)]), np.array([])
        if strict:
            return False, float(interior[0]) if len(interior) else 0.0, 0.0
    interior = np.array([w for w in interior if usable(w)])
    roots = np.array([w for w in roots if usable(w)])
    worst = math.inf
    if len(interior):
        eigs, norms = _hermitian_eigs(G, interior)
        mins = eigs[:, 0]
        worst = float(mins.min())
        floor = _SIGN_RTOL * norms
        bad = mins <= floor if strict else mins < -np.maximum(floor, 0 if not degenerate else tol.psd)
        if np.any(bad):
            return False, float(interior[np.argmax(bad)]), worst
    if len(roots):
        eigs, _ = _hermitian_eigs(G, roots)
        mins = eigs[:, 0]
        worst = min(worst, float(mins.min()))
        bad = mins <= tol.psd if strict else mins < -tol.psd
        if np.any(bad):
            return False, float(roots[np.argmax(bad)]), worst
    return True, None, worst


def _residue_condition(G: TransferMatrix):
    """Residues ``lim (s - jw0) G(s)`` at axis poles must be Hermitian PSD."""
    tol = get_tolerances()
    for z, mult in G.poles().marginal(tol.marginal):
        if mult > 1:
            raise RepeatedAxisPole(f"pole of multiplicity {mult} at {z} on the imaginary axis")
        p0 = complex(0.0, z.imag)
        R = np.zeros(G.shape, dtype=complex)
        for i, row in enumerate(G.entries):
            for j, e in enumerate(row):
                if e.den.degree == 0 or abs(e.den(p0)) > 1e-6 * max(1.0, np.max(np.abs(e.den.coefficients))):
                    continue
                q, _ = divmod(e.den, Polynomial([-p0, 1.0]))
                R[i, j] = e.num(p0) / q(p0)
        scale = max(1.0, float(np.max(np.abs(R))))
        if np.max(np.abs(R - R.conj().T)) > 1e-8 * scale:
            return False, p0
        if np.linalg.eigvalsh(0.5 * (R + R.conj().T))[0] < -tol.psd * scale:
            return False, p0
    return True, None


def _is_pr(G: TransferMatrix, witnesses: dict | None = None) -> bool:
    tol = get_tolerances()
    w = {} if witnesses is None else witnesses
    rhp = [z for z, _ in G.poles().roots if z.real > tol.marginal]
    if rhp:
        w["failing_pole"] = complex(rhp[0])
        return False
    ok, freq, worst = _hermitian_condition(G, strict=False)
    w["min_hermitian_eig"] = worst
    if not ok:
        w["failing_frequency"] = freq
        return False
    ok, pole = _residue_condition(G)
    if not ok:
        w["failing_pole"] = pole
        return False
    return True


def _strictly_pr_epsilon(G: TransferMatrix) -> float | None:
    poles = G.poles()
    if len(poles):
        eps = 0.5 * abs(max(z.real for z, _ in poles.roots))
    else:
        eps = 1.0
    for _ in range(_EPS_HALVINGS + 1):
        shifted = G.map(lambda e: e.shift(-eps))
        try:
            if _is_pr(shifted):
                return eps
        except RepeatedAxisPole:
            pass
        eps *= 0.5
    return None


def classify_pr(G: TransferMatrix) -> PassivityClass:
    """Place ``G`` in the positive-real hierarchy.

    Witnesses record the failing pole or frequency for the first check that
    fails, the certified ``epsilon`` for the strictly-PR tier and the
    uniform lower bound ``delta`` for the strongly-PR tier.
    """
    if not G.is_square:
        raise NotSquare(f"expected a square transfer matrix, got {G.shape}")
    if not G.is_proper:
        raise ImproperSystem("positive-real classification needs a proper transfer matrix")
    tol = get_tolerances()
    w: dict = {}
    if not _is_pr(G, w):
        return PassivityClass(PRTier.NOT_PR, w)
    if G.poles().closed_rhp(tol.marginal).degree:
        w["failing_pole"] = complex(G.poles().closed_rhp(tol.marginal).locations[0])
        return PassivityClass(PRTier.PR, w)
    ok, freq, _ = _hermitian_condition(G, strict=True)
    if not ok:
        w["failing_frequency"] = freq
        return PassivityClass(PRTier.PR, w)
    eps = _strictly_pr_epsilon(G)
    if eps is None:
        w["epsilon"] = None
        return PassivityClass(PRTier.STRONG_QUOTED_PR, w)
    w["epsilon"] = eps
    D = G.value_at_infinity()
    at_inf = float(np.linalg.eigvalsh(D + D.conj().T)[0])
    lim = get_tolerances().psd
    if at_inf <= lim:
        w["delta_at_infinity"] = at_inf
        return PassivityClass(PRTier.STRICTLY_PR, w)
    grid = np.concatenate([-np.geomspace(1e-4, 1e6, 300)[::-1], [0.0], np.geomspace(1e-4, 1e6, 300)])
    delta = min(float(_hermitian_eigs(G, grid)[0][:, 0].min()), at_inf)
    w["delta"] = delta
    if delta <= lim:
        return PassivityClass(PRTier.STRICTLY_PR, w)
    return PassivityClass(PRTier.STRONGLY_PR, w)


# ---------------------------------------------------------------------------
# interconnections
# ---------------------------------------------------------------------------

def _check_loop_shapes(G1, G2):
    if not (G1.is_square and G2.is_square) or G1.shape != G2.shape:
        raise DimensionMismatch(f"incompatible loop operands {G1.shape} and {G2.shape}")


def passivity_interconnect(G1: TransferMatrix, G2: TransferMatrix):
    """Passivity theorem: PR together with "strong" PR gives a stable loop.

    Two operands that are merely PR prove nothing; the loop may well be
    unstable.  Returns ``(theorem_applies, verdict)``, the verdict being
    Inconclusive when the theorem does not apply.
    """
    _check_loop_shapes(G1, G2)
    c1, c2 = classify_pr(G1), classify_pr(G2)
    applies = (c1.at_least(PRTier.PR) and c2.at_least(PRTier.STRONG_QUOTED_PR)) or (
        c2.at_least(PRTier.PR) and c1.at_least(PRTier.STRONG_QUOTED_PR)
    )
    notes = (f"G1: {c1.tier}", f"G2: {c2.tier}")
    status = Status.STABLE if applies else Status.INCONCLUSIVE
    return applies, Verdict(status, RootSet(), "passivity", notes)


def _require_stable(G: TransferMatrix):
    tau = get_tolerances().marginal
    if any(z.real >= -tau for z, _ in G.poles().roots):
        raise UnstableOperand("the mixed test needs stable operands")


def mixed_check(G: TransferMatrix, c: float, *, points: int = 200) -> MixedReport:
    """Positive-definite Hermitian part for ``|w| <= c`` and gain below 1
    for ``|w| > c`` (sampled, plus the limit at infinity)."""
    if c <= 0:
        raise ValueError("crossover frequency must be positive")
    _require_stable(G)
    tol = get_tolerances()
    low = np.concatenate([[0.0], np.geomspace(c * 1e-4, c, points)])
    high = np.geomspace(c, c * 1e6, points + 1)[1:]
    if not G.is_real:
        low = np.concatenate([-low[::-1], low])
        high = np.concatenate([-high[::-1], high])
    pr_ok = bool(np.all(_hermitian_eigs(G, low)[0][:, 0] > tol.psd))
    gains = sigma_max(G, np.concatenate([high, [math.inf]]))
    return MixedReport(float(c), pr_ok, bool(np.all(gains < 1.0)))


def mixed_interconnect(G1: TransferMatrix, G2: TransferMatrix, *, candidates=None):
    """Search for a common crossover ``c`` satisfying the mixed property.

    Returns ``(common_c, verdict)``; ``common_c`` is None and the verdict
    Inconclusive when no candidate works.  Even a common ``c`` says nothing
    about interconnections through a network that lacks the property.
    """
    _check_loop_shapes(G1, G2)
    _require_stable(G1)
    _require_stable(G2)
    if candidates is None:
        mags = [abs(z) for G in (G1, G2) for z in G.poles().locations if abs(z) > 0] or [1.0]
        candidates = np.geomspace(1e-2 * min(mags), 1e2 * max(mags), 41)
    for c in candidates:
        if mixed_check(G1, c).ok and mixed_check(G2, c).ok:
            return float(c), Verdict(
                Status.STABLE, RootSet(), "mixed", (f"common crossover c = {c:.6g}",)
            )
    return None, Verdict(Status.INCONCLUSIVE, RootSet(), "mixed", ("no common crossover found",))
