"""Transfer matrices, closed-loop maps and the direct stability verdict."""

from __future__ import annotations

import dataclasses
import enum
import itertools
import numbers
from typing import Iterable, Sequence

import numpy as np

from .config import get_tolerances
from .exceptions import (
    DimensionMismatch,
    NotSquare,
    PoleEvaluation,
    SingularLoop,
    SingularMatrix,
)
from .polyrat import Polynomial, RationalFunction, RootSet, poly_gcd

__all__ = [
    "TransferMatrix",
    "Status",
    "Verdict",
    "tm_eval",
    "tm_det",
    "tm_inverse",
    "closed_loop",
    "direct_stability",
]

# adjugate expansion up to this size, elimination above
_ADJUGATE_MAX = 4
# relative remainder below which one polynomial is taken to divide another
_DIVIDES_RTOL = 1e-9
# fixed off-axis points at which candidate inverses are checked numerically
_CHECK_POINTS = (0.3712 + 1.2861j, -0.6143 + 0.4727j, 1.9031 - 2.2519j, -0.2219 - 3.7083j)
_INVERSE_RESID = 1e-6


def _rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    if isinstance(x, tuple) and len(x) == 2:
        return RationalFunction(Polynomial(x[0]), Polynomial(x[1]))
    return RationalFunction.constant(x)


class TransferMatrix:
    """Rectangular grid of rational functions, stored row-major."""

    __slots__ = ("_entries", "_shape")

    def __init__(self, entries: Iterable[Iterable]):
        rows = tuple(tuple(_rf(e) for e in row) for row in entries)
        if not rows or not rows[0]:
            raise DimensionMismatch("a transfer matrix needs at least one entry")
        if any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatch("ragged transfer-matrix rows")
        self._entries = rows
        self._shape = (len(rows), len(rows[0]))

    # constructors ---------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "TransferMatrix":
        return cls([[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "TransferMatrix":
        cols = rows if cols is None else cols
        return cls([[0.0] * cols for _ in range(rows)])

    @classmethod
    def diag(cls, items: Sequence) -> "TransferMatrix":
        n = len(items)
        return cls([[items[i] if i == j else 0.0 for j in range(n)] for i in range(n)])

    @classmethod
    def constant(cls, array) -> "TransferMatrix":
        a = np.atleast_2d(np.asarray(array))
        return cls([[complex(v) if np.iscomplexobj(v) and v.imag else float(np.real(v))
                     for v in row] for row in a])

    @classmethod
    def scalar(cls, f) -> "TransferMatrix":
        return cls([[f]])

    # properties -----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self._shape

    @property
    def rows(self) -> int:
        return self._shape[0]

    @property
    def cols(self) -> int:
        return self._shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def entries(self) -> tuple:
        return self._entries

    @property
    def is_real(self) -> bool:
        return all(e.is_real for e in self)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for e in self)

    @property
    def is_proper(self) -> bool:
        return all(e.is_proper for e in self)

    def __iter__(self):
        for row in self._entries:
            yield from row

    def __getitem__(self, idx):
        i, j = idx
        return self._entries[i][j]

    def map(self, fn) -> "TransferMatrix":
        return TransferMatrix([[fn(e) for e in row] for row in self._entries])

    def transpose(self) -> "TransferMatrix":
        return TransferMatrix(list(zip(*self._entries)))

    @property
    def T(self) -> "TransferMatrix":
        return self.transpose()

    def poles(self) -> RootSet:
        """Union of entry pole locations (largest entry multiplicity kept)."""
        out = RootSet()
        for e in self:
            if e.den.degree > 0:
                out = out.union(e.poles())
        return out

    def value_at_infinity(self) -> np.ndarray:
        """Constant feedthrough ``P(inf)``; raises ImproperSystem if improper."""
        vals = [[e.value_at_infinity() for e in row] for row in self._entries]
        return np.asarray(vals, dtype=complex)

    def freqresp(self, s) -> np.ndarray:
        """Evaluate at an array of points; returns shape ``(len(s), rows, cols)``."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty((len(s), self.rows, self.cols), dtype=complex)
        guard = get_tolerances().pole_guard
        for i, row in enumerate(self._entries):
            for j, e in enumerate(row):
                den = e.den(s)
                bad = np.abs(den) < guard
                if np.any(bad):
                    raise PoleEvaluation(
                        f"entry ({i}, {j}) has a pole at s = {s[bad][0]}", index=(i, j), s=s[bad][0]
                    )
                out[:, i, j] = e.num(s) / den
        return out

    def __call__(self, s):
        return tm_eval(self, s)

    # algebra --------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TransferMatrix):
            return other
        if isinstance(other, np.ndarray):
            return TransferMatrix.constant(other)
        return None

    def __add__(self, other):
        other_m = self._coerce(other)
        if other_m is None:
            if isinstance(other, (numbers.Number, RationalFunction)) and self.is_square:
                other_m = TransferMatrix.identity(self.rows) * other
            else:
                return NotImplemented
        if other_m.shape != self.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other_m.shape}")
        return TransferMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self._entries, other_m._entries)]
        )

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda e: -e)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (numbers.Number, RationalFunction, Polynomial)):
            return self.map(lambda e: e * other)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RationalFunction.constant(0.0)
                for k in range(self.cols):
                    a, b = self._entries[i][k], other._entries[k][j]
                    if not (a.is_zero or b.is_zero):
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return TransferMatrix(out)

    def __rmatmul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other @ self

    def allclose(self, other, rtol=1e-8, atol=1e-10) -> bool:
        other = self._coerce(other) or other
        if self.shape != other.shape:
            return False
        return all(a.allclose(b, rtol, atol) for a, b in zip(self, other))

    def __repr__(self):
        body = ",\n ".join("[" + ", ".join(str(e) for e in row) + "]" for row in self._entries)
        return f"TransferMatrix([{body}])"


# ---------------------------------------------------------------------------

class Status(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclasses.dataclass(frozen=True)
class Verdict:
    """Outcome of a stability test.

    ``witness_poles`` holds the closed-right-half-plane evidence: poles (or
    determinant zeros) that make the loop unstable or marginal.
    """

    status: Status
    witness_poles: RootSet = RootSet()
    method: str = ""
    notes: tuple = ()

    @classmethod
    def from_poles(cls, poles: RootSet, method: str, tau: float | None = None, notes=()):
        tau = get_tolerances().marginal if tau is None else tau
        witnesses = poles.closed_rhp(tau)
        if any(z.real > tau for z, _ in witnesses):
            status = Status.UNSTABLE
        elif len(witnesses):
            status = Status.MARGINAL
        else:
            status = Status.STABLE
        return cls(status, witnesses, method, tuple(notes))

    @property
    def is_stable(self) -> bool:
        return self.status is Status.STABLE

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "method": self.method,
            "witnesses": [
                {"re": float(z.real), "im": float(z.imag), "multiplicity": int(m)}
                for z, m in self.witness_poles
            ],
            **({"notes": list(self.notes)} if self.notes else {}),
        }


# ---------------------------------------------------------------------------

def tm_eval(P: TransferMatrix, s) -> np.ndarray:
    """Entrywise evaluation at a single complex point."""
    if np.isscalar(s) and np.isinf(abs(s)):
        return P.value_at_infinity()
    return P.freqresp([s])[0]


def _require_square(P: TransferMatrix):
    if not P.is_square:
        raise NotSquare(f"expected a square transfer matrix, got {P.shape}")


def poly_lcm(a: Polynomial, b: Polynomial) -> Polynomial:
    g = poly_gcd(a, b)
    q = b // g if g.degree > 0 else b / g.leading
    return (a * q).monic()


def _poly_det(rows) -> Polynomial:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = Polynomial([0.0])
    for j in range(n):
        e = rows[0][j]
        if e.is_zero:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = e * _poly_det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _exact_cofactor(p: Polynomial, q: Polynomial) -> Polynomial | None:
    """``p / q`` when ``q`` divides ``p`` to rounding, else None."""
    if q.degree == 0:
        return p / q.leading
    quo, rem = divmod(p, q)
    scale = float(np.max(np.abs(p.coefficients)))
    if rem.is_zero or float(np.max(np.abs(rem.coefficients))) <= _DIVIDES_RTOL * scale:
        return quo
    return None


def common_denominator(P: TransferMatrix):
    """Return ``(N, d)`` with ``P = N/d`` and ``d`` a monic common denominator.

    ``d`` is the LCM of the entry denominators whenever the approximate GCD
    allows an exact split; otherwise the offending denominator is multiplied
    in whole, so ``P = N/d`` always holds.
    """
    d = Polynomial([1.0])
    for e in P:
        if e.is_zero or e.den.degree == 0 or _exact_cofactor(d, e.den) is not None:
            continue
        rest = _exact_cofactor(e.den, poly_gcd(d, e.den))
        d = (d * (e.den if rest is None else rest)).monic()
        if _exact_cofactor(d, e.den) is None:
            d = (d * e.den).monic()
    N = []
    for row in P.entries:
        out = []
        for e in row:
            q = _exact_cofactor(d, e.den)
            out.append(e.num * (d // e.den if q is None else q))
        N.append(out)
    return N, d


def _det_laplace(rows: list) -> RationalFunction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    # expand along the row with most zeros
    r = max(range(n), key=lambda i: sum(e.is_zero for e in rows[i]))
    acc = RationalFunction.constant(0.0)
    for j, e in enumerate(rows[r]):
        if e.is_zero:
            continue
        minor = [row[:j] + row[j + 1:] for i, row in enumerate(rows) if i != r]
        term = e * _det_laplace(minor)
        acc = acc + term if (r + j) % 2 == 0 else acc - term
    return acc


def _det_elimination(rows: list) -> RationalFunction:
    a = [list(r) for r in rows]
    n = len(a)
    det = RationalFunction.constant(1.0)
    for k in range(n):
        piv = next((i for i in range(k, n) if not a[i][k].is_zero), None)
        if piv is None:
            return RationalFunction.constant(0.0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det = det * a[k][k]
        inv = a[k][k].reciprocal()
        for i in range(k + 1, n):
            if a[i][k].is_zero:
                continue
            f = a[i][k] * inv
            a[i] = [a[i][j] - f * a[k][j] if j > k else a[i][j] for j in range(n)]
    return det


def tm_det(P: TransferMatrix) -> RationalFunction:
    """Determinant as a reduced rational function."""
    _require_square(P)
    rows = [list(r) for r in P.entries]
    if P.rows <= _ADJUGATE_MAX:
        return _det_laplace(rows)
    return _det_elimination(rows)


def _inverse_elimination(P: TransferMatrix) -> TransferMatrix:
    n = P.rows
    one, zero = RationalFunction.constant(1.0), RationalFunction.constant(0.0)
    a = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(P.entries)]
    for k in range(n):
        piv = next((i for i in range(k, n) if not a[i][k].is_zero), None)
        if piv is None:
            raise SingularMatrix("matrix is singular as a rational matrix")
        a[k], a[piv] = a[piv], a[k]
        inv = a[k][k].reciprocal()
        a[k] = [e * inv for e in a[k]]
        for i in range(n):
            if i != k and not a[i][k].is_zero:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return TransferMatrix([row[n:] for row in a])


def _inverse_rational(P: TransferMatrix) -> TransferMatrix:
    det = tm_det(P)
    if det.is_zero:
        raise SingularMatrix("determinant vanishes identically")
    n = P.rows
    if n == 1:
        return TransferMatrix([[det.reciprocal()]])
    rows = [list(r) for r in P.entries]
    inv_det = det.reciprocal()
    out = [[None] * n for _ in range(n)]
    for i, j in itertools.product(range(n), range(n)):
        minor = [row[:j] + row[j + 1:] for k, row in enumerate(rows) if k != i]
        cof = _det_laplace(minor)
        if (i + j) % 2:
            cof = -cof
        out[j][i] = cof * inv_det
    return TransferMatrix(out)


def _inverse_polynomial(P: TransferMatrix) -> TransferMatrix:
    # P = N/d gives P^-1 = d adj(N) / det(N); one reduction per entry
    N, d = common_denominator(P)
    det = _poly_det(N)
    if det.is_zero:
        raise SingularMatrix("determinant vanishes identically")
    n = P.rows
    if n == 1:
        return TransferMatrix([[RationalFunction(d, det)]])
    out = [[None] * n for _ in range(n)]
    for i, j in itertools.product(range(n), range(n)):
        minor = [row[:j] + row[j + 1:] for k, row in enumerate(N) if k != i]
        cof = _poly_det(minor) * d
        if (i + j) % 2:
            cof = -cof
        out[j][i] = RationalFunction(cof, det)
    return TransferMatrix(out)


def _inverse_error(P: TransferMatrix, Q: TransferMatrix) -> float:
    err = 0.0
    for s in _CHECK_POINTS:
        with np.errstate(all="ignore"):
            M = P.freqresp([s])[0]
            R = Q.freqresp([s])[0]
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(R))):
            continue
        resid = np.linalg.norm(M @ R - np.eye(P.rows))
        err = max(err, resid / max(1.0, np.linalg.cond(M) * 1e-6))
    return err


def tm_inverse(P: TransferMatrix) -> TransferMatrix:
    """Inverse of a square rational matrix.

    Two exact forms are built: cofactors of the rational entries, and the
    polynomial adjugate of a common-denominator split.  Approximate
    cancellation can fail in either one (the first struggles when factors
    pile up across entries, the second when the answer needs many roots
    cancelled at once).  A missed cancellation shows up as surplus degree,
    a false one as a numerical mismatch, so the accurate candidate of
    smallest denominator degree is returned.
    """
    _require_square(P)
    if P.rows > _ADJUGATE_MAX:
        return _inverse_elimination(P)
    candidates = [_inverse_rational(P), _inverse_polynomial(P)]
    errors = [_inverse_error(P, Q) for Q in candidates]
    good = [Q for Q, e in zip(candidates, errors) if e <= _INVERSE_RESID]
    if not good:
        return candidates[int(np.argmin(errors))]
    return min(good, key=lambda Q: sum(e.den.degree for e in Q))


def closed_loop(P: TransferMatrix, U: TransferMatrix | None = None):
    """Sensitivity ``(I+PU)^-1`` and complementary map ``PU (I+PU)^-1``.

    ``U=None`` is the unity-feedback loop (``U = I``).
    """
    L = P if U is None else P @ U
    _require_square(L)
    M = TransferMatrix.identity(L.rows) + L
    if tm_det(M).is_zero:
        raise SingularLoop("det(I + PU) vanishes identically; the loop is ill-posed")
    S = tm_inverse(M)
    T = L @ S
    return S, T


def direct_stability(P: TransferMatrix, U: TransferMatrix | None = None) -> Verdict:
    """Closed-loop verdict from the poles of every entry of ``(I+PU)^-1``."""
    S, _ = closed_loop(P, U)
    return Verdict.from_poles(S.poles(), method="direct")
