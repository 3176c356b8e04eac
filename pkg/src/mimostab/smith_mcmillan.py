"""Smith-McMillan form and multiplicity-correct unstable pole counting.

The form is built from determinantal divisors: with ``P = N(s)/d(s)``
(``d`` the monic LCM of the entry denominators), ``D_i`` is the monic GCD
of all ``i x i`` minors of ``N`` and the invariant factors are
``a_i = D_i / D_{i-1}``.  Dividing each by ``d`` and reducing gives
``eps_i / psi_i``.

The minor enumeration is exponential in the matrix size; intended for
``n <= 4``.
"""

from __future__ import annotations

import dataclasses
import itertools
import warnings
from functools import reduce

import numpy as np

from .config import get_tolerances
from .exceptions import NotSquare, SingularLoop, ZeroMatrix
from .polyrat import Polynomial, RationalFunction, RootSet, poly_gcd, poly_roots
from .tfmatrix import (
    Status,
    TransferMatrix,
    Verdict,
    _poly_det,
    common_denominator,
    poly_lcm,
    tm_det,
)

__all__ = [
    "SmithMcMillanForm",
    "PoleZeroReport",
    "smith_mcmillan",
    "unstable_pole_count",
    "theorem1_check",
    "poly_lcm",
]

# a minor whose coefficients are all below this (relative to the size of
# the matrix entries raised to the minor order) is treated as zero
_MINOR_RTOL = 1e-10


@dataclasses.dataclass(frozen=True)
class SmithMcMillanForm:
    factors: tuple  # of (epsilon, psi) Polynomial pairs
    rank: int

    @property
    def pole_polynomial(self) -> Polynomial:
        return reduce(lambda a, b: a * b, (psi for _, psi in self.factors), Polynomial([1.0]))

    @property
    def zero_polynomial(self) -> Polynomial:
        return reduce(lambda a, b: a * b, (eps for eps, _ in self.factors), Polynomial([1.0]))


@dataclasses.dataclass(frozen=True)
class PoleZeroReport:
    poles: RootSet
    zeros: RootSet
    unstable_pole_count: int
    marginal_poles: RootSet = RootSet()


def _gcd_many(polys) -> Polynomial | None:
    g = None
    for p in polys:
        if p.is_zero:
            continue
        g = p.monic() if g is None else poly_gcd(g, p)
        if g.degree == 0:
            break
    return g


def smith_mcmillan(P: TransferMatrix) -> SmithMcMillanForm:
    """Smith-McMillan form via determinantal divisors of the numerator matrix."""
    if P.is_zero:
        raise ZeroMatrix("the Smith-McMillan form of the zero matrix is undefined")
    N, d = common_denominator(P)
    m, n = P.shape
    scale = max(float(np.max(np.abs(p.coefficients))) for row in N for p in row)
    divisors = [Polynomial([1.0])]
    for k in range(1, min(m, n) + 1):
        minors = []
        for ri in itertools.combinations(range(m), k):
            for ci in itertools.combinations(range(n), k):
                mnr = _poly_det([[N[i][j] for j in ci] for i in ri])
                if np.max(np.abs(mnr.coefficients)) > _MINOR_RTOL * max(scale, 1.0) ** k:
                    minors.append(mnr)
        g = _gcd_many(minors)
        if g is None:
            break
        divisors.append(g)
    factors = []
    for k in range(1, len(divisors)):
        a_k = divisors[k] // divisors[k - 1] if divisors[k - 1].degree else divisors[k]
        f = RationalFunction(a_k, d)
        eps = f.num / f.num.leading
        factors.append((eps, f.den))
    return SmithMcMillanForm(tuple(factors), len(factors))


def unstable_pole_count(P: TransferMatrix) -> PoleZeroReport:
    """Unstable poles of ``P`` counted with McMillan multiplicity.

    Poles inside the marginal band are reported separately and never counted.
    """
    form = smith_mcmillan(P)
    tau = get_tolerances().marginal
    pole_poly = form.pole_polynomial
    zero_poly = form.zero_polynomial
    poles = poly_roots(pole_poly) if pole_poly.degree > 0 else RootSet()
    zeros = poly_roots(zero_poly) if zero_poly.degree > 0 else RootSet()
    marginal = poles.marginal(tau)
    if len(marginal):
        warnings.warn(
            f"P has poles on the imaginary axis ({marginal}); they are excluded "
            "from the unstable pole count",
            RuntimeWarning,
            stacklevel=2,
        )
    count = poles.unstable(tau).degree
    return PoleZeroReport(poles, zeros, count, marginal)


def theorem1_check(P: TransferMatrix):
    """Determinant test with hidden-mode detection.

    Stable iff ``det(I+P)`` has no unstable zeros and its unstable poles,
    counted with multiplicity, match the McMillan count of ``P``.

    Returns
    -------
    verdict : Verdict
    hidden_mode : bool
        True when ``P`` has more unstable pole multiplicity than ``det(I+P)``.
    """
    if not P.is_square:
        raise NotSquare(f"expected a square transfer matrix, got {P.shape}")
    tau = get_tolerances().marginal
    det = tm_det(TransferMatrix.identity(P.rows) + P)
    if det.is_zero:
        raise SingularLoop("det(I + P) vanishes identically")
    zeros = det.zeros()
    det_poles = det.poles() if det.den.degree else RootSet()
    n_det = det_poles.unstable(tau).degree
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = unstable_pole_count(P) if not P.is_zero else PoleZeroReport(RootSet(), RootSet(), 0)
    hidden = n_det != report.unstable_pole_count
    bad_zeros = zeros.closed_rhp(tau)
    notes = [f"det(I+P) = {det}", f"unstable poles: P {report.unstable_pole_count}, det {n_det}"]
    if any(z.real > tau for z, _ in bad_zeros):
        verdict = Verdict(Status.UNSTABLE, bad_zeros, "theorem1", tuple(notes))
    elif hidden:
        notes.append("hidden unstable mode")
        verdict = Verdict(Status.UNSTABLE, report.poles.unstable(tau), "theorem1", tuple(notes))
    elif len(bad_zeros):
        verdict = Verdict(Status.MARGINAL, bad_zeros, "theorem1", tuple(notes))
    else:
        verdict = Verdict(Status.STABLE, RootSet(), "theorem1", tuple(notes))
    return verdict, hidden
