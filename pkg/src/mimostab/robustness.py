"""H-infinity norms, the small-gain test and unstructured uncertainty bounds."""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .config import get_tolerances
from .exceptions import DimensionMismatch, NominalUnstable, UnstableOperand
from .polyrat import RootSet
from .tfmatrix import Status, TransferMatrix, Verdict, closed_loop, direct_stability

__all__ = [
    "HinfResult",
    "UncertaintyKind",
    "UncertaintyModel",
    "hinf_norm",
    "sigma_max",
    "small_gain_check",
    "uncertainty_bound",
    "perturbed_verdict",
]

_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclasses.dataclass(frozen=True)
class HinfResult:
    value: float
    peak_frequency: float
    converged: bool


class UncertaintyKind(str, enum.Enum):
    ADDITIVE = "Additive"
    MULTIPLICATIVE = "Multiplicative"

    def __str__(self) -> str:
        return self.value


@dataclasses.dataclass(frozen=True)
class UncertaintyModel:
    kind: UncertaintyKind
    bound: float


def sigma_max(G: TransferMatrix, omegas) -> np.ndarray:
    """Largest singular value of ``G(j*omega)`` for each omega.

    ``+inf`` in ``omegas`` evaluates the limit at infinity.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    out = np.empty(len(omegas))
    finite = np.isfinite(omegas)
    if np.any(finite):
        vals = G.freqresp(1j * omegas[finite])
        gram = np.conj(np.swapaxes(vals, 1, 2)) @ vals
        ev = np.linalg.eigvalsh(gram)
        out[finite] = np.sqrt(np.maximum(ev[:, -1], 0.0))
    if not np.all(finite):
        D = G.value_at_infinity()
        ev = np.linalg.eigvalsh(np.conj(D.T) @ D)
        out[~finite] = math.sqrt(max(ev[-1], 0.0))
    return out


def _is_stable(G: TransferMatrix) -> bool:
    tau = get_tolerances().marginal
    return all(z.real < -tau for z, _ in G.poles().roots)


def _scale(G: TransferMatrix):
    mags = [abs(z) for z in G.poles().locations if abs(z) > 0]
    for e in G:
        if e.num.degree > 0:
            mags.extend(abs(z) for z in e.zeros().locations if abs(z) > 0)
    if not mags:
        return 1.0, 1.0
    return min(mags), max(mags)


def _golden_max(f, a, b, rel_tol, max_iter=200):
    """Maximise a unimodal function of log-frequency on ``[a, b]``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rel_tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    else:
        return (c, fc) if fc >= fd else (d, fd), False
    return ((c, fc) if fc >= fd else (d, fd)), True


def hinf_norm(G: TransferMatrix, rel_tol: float = 1e-6, *, grid_points: int = 400) -> HinfResult:
    """Peak of the largest singular value over the imaginary axis.

    A log-spaced coarse grid (plus ``omega = 0`` and the limit at infinity)
    locates candidates; the best few are refined by golden-section search
    in ``log10(omega)``.
    """
    if not 0 < rel_tol <= 0.1:
        raise ValueError("rel_tol must lie in (0, 0.1]")
    if not _is_stable(G):
        raise UnstableOperand("the H-infinity norm is only defined here for stable systems")
    if G.is_zero:
        return HinfResult(0.0, 0.0, True)
    lo, hi = _scale(G)
    lw = np.linspace(math.log10(lo) - 3, math.log10(hi) + 3, grid_points)
    sig = sigma_max(G, 10.0 ** lw)
    at0 = float(sigma_max(G, [0.0])[0])
    at_inf = float(sigma_max(G, [math.inf])[0])
    best_val, best_w = at0, 0.0
    if at_inf > best_val:
        best_val, best_w = at_inf, math.inf
    converged = True

    def f(x):
        return float(sigma_max(G, [10.0 ** x])[0])

    # refine around local maxima of the coarse grid, largest first
    interior = np.flatnonzero((sig[1:-1] >= sig[:-2]) & (sig[1:-1] >= sig[2:])) + 1
    cands = sorted(set(interior.tolist()) | {int(np.argmax(sig))}, key=lambda i: -sig[i])[:5]
    for i in cands:
        a = lw[max(i - 1, 0)]
        b = lw[min(i + 1, len(lw) - 1)]
        (x, val), ok = _golden_max(f, a, b, rel_tol)
        val = max(val, float(sig[i]))
        converged &= ok
        if val > best_val:
            best_val, best_w = val, 10.0 ** x if val > sig[i] else 10.0 ** lw[i]
    if not G.is_real:
        # negative frequencies are not mirror images for complex coefficients
        sig_n = sigma_max(G, -(10.0 ** lw))
        j = int(np.argmax(sig_n))
        if sig_n[j] > best_val:
            (x, val), ok = _golden_max(
                lambda x: float(sigma_max(G, [-(10.0 ** x)])[0]),
                lw[max(j - 1, 0)], lw[min(j + 1, len(lw) - 1)], rel_tol,
            )
            converged &= ok
            best_val, best_w = max(val, float(sig_n[j])), -(10.0 ** x)
    return HinfResult(float(best_val), float(best_w), bool(converged))


def small_gain_check(G1: TransferMatrix, G2: TransferMatrix):
    """Small-gain test for the loop formed by ``G1`` and ``G2``.

    Returns ``(applies, product_norm, verdict)``.  The test is only
    sufficient: when it does not apply the verdict is Inconclusive and the
    loop may well be stable.
    """
    if G1.cols != G2.rows or G1.rows != G2.cols:
        raise DimensionMismatch(f"cannot close a loop of {G1.shape} and {G2.shape}")
    if not (_is_stable(G1) and _is_stable(G2)):
        return False, math.inf, Verdict(
            Status.INCONCLUSIVE, RootSet(), "small-gain", ("an operand is not stable",)
        )
    norm = hinf_norm(G1 @ G2).value
    if norm < 1.0:
        return True, norm, Verdict(
            Status.STABLE, RootSet(), "small-gain", (f"||G1 G2||inf = {norm:.6g} < 1",)
        )
    return False, norm, Verdict(
        Status.INCONCLUSIVE, RootSet(), "small-gain",
        (f"||G1 G2||inf = {norm:.6g} >= 1; the test is conservative",),
    )


def uncertainty_bound(P: TransferMatrix, kind=UncertaintyKind.ADDITIVE) -> UncertaintyModel:
    """Largest unstructured perturbation norm that provably keeps the loop stable.

    Additive: ``1/||(I+P)^-1||inf``; multiplicative: ``1/||P (I+P)^-1||inf``.
    """
    kind = UncertaintyKind(kind)
    nominal = direct_stability(P)
    if not nominal.is_stable:
        raise NominalUnstable(f"nominal loop is {nominal.status}")
    S, T = closed_loop(P)
    G = S if kind is UncertaintyKind.ADDITIVE else T
    norm = hinf_norm(G).value
    bound = math.inf if norm == 0 else 1.0 / norm
    return UncertaintyModel(kind, bound)


def perturbed_verdict(P: TransferMatrix, U: TransferMatrix) -> Verdict:
    """Closed-loop verdict with the block ``U`` inserted in series with ``P``."""
    v = direct_stability(P, U)
    return dataclasses.replace(v, method="perturbed")
