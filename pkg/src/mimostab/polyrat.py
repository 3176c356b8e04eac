"""Polynomials and rational functions of the Laplace variable ``s``.

Coefficients are stored in ascending order: index ``i`` holds the
coefficient of ``s**i``.  Real and complex coefficients are both supported;
complex coefficients show up when a loop is rotated by ``exp(j*theta)``.

All objects are immutable.  Rational functions are kept in reduced form
(numerator and denominator coprime up to the root-matching tolerance) with
a monic denominator.
"""

from __future__ import annotations

import dataclasses
import numbers
from typing import Iterable, Sequence

import numpy as np

from .config import get_tolerances
from .exceptions import DivisionByZeroFunction, PoleEvaluation, ZeroPolynomial

__all__ = [
    "Polynomial",
    "RationalFunction",
    "RootSet",
    "poly_arith",
    "poly_roots",
    "poly_gcd",
    "rat_arith",
    "rat_eval",
]

# relative size under which a leading coefficient produced by cancellation
# is treated as zero
_TRIM_RTOL = 1e-12
# neighbourhood searched for the scattered members of one multiple root
_WIDE_RTOL = 1e-2


def _as_array(values) -> np.ndarray:
    c = np.atleast_1d(np.asarray(values))
    if c.ndim != 1:
        raise ValueError("coefficients must be a 1-D sequence")
    if c.dtype.kind in "biuf":
        return c.astype(float)
    c = c.astype(complex)
    if not np.any(c.imag):
        return c.real.copy()
    return c


def _strip(c: np.ndarray, atol: float = 0.0) -> np.ndarray:
    n = len(c)
    while n > 1 and abs(c[n - 1]) <= atol:
        n -= 1
    if n == 1 and abs(c[0]) <= atol:
        return np.zeros(1, dtype=c.dtype)
    return c[:n]


def _scale(*arrays) -> float:
    return max((float(np.max(np.abs(a))) for a in arrays if len(a)), default=0.0)


class Polynomial:
    """Polynomial with coefficients in ascending degree order."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable = (0.0,), *, atol: float = 0.0):
        if not isinstance(coefficients, np.ndarray):
            coefficients = list(coefficients)
        c = _strip(_as_array(coefficients), atol)
        if len(c) == 0:
            c = np.zeros(1)
        c = np.array(c)
        c.setflags(write=False)
        self._c = c

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls([value])

    @classmethod
    def from_roots(cls, roots: Iterable, leading=1.0) -> "Polynomial":
        r = np.asarray(list(roots), dtype=complex)
        if r.size == 0:
            return cls([leading])
        c = np.poly(r)[::-1] * leading
        if np.isrealobj(leading) and np.max(np.abs(c.imag)) <= 1e-12 * max(1.0, _scale(c)):
            # conjugate-closed root set
            c = c.real
        return cls(c)

    @classmethod
    def s(cls) -> "Polynomial":
        return cls([0.0, 1.0])

    # basic properties -----------------------------------------------------
    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def is_zero(self) -> bool:
        return len(self._c) == 1 and self._c[0] == 0

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self._c)

    @property
    def leading(self):
        return self._c[-1]

    def monic(self) -> "Polynomial":
        if self.is_zero:
            raise ZeroPolynomial("cannot normalise the zero polynomial")
        return Polynomial(self._c / self._c[-1])

    def conj(self) -> "Polynomial":
        return Polynomial(np.conj(self._c))

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        return Polynomial(self._c[1:] * np.arange(1, len(self._c)))

    def shift(self, a) -> "Polynomial":
        """Return ``p(s + a)``."""
        out = Polynomial([0.0])
        lin = Polynomial([a, 1.0])
        for c in self._c[::-1]:
            out = out * lin + c
        return out

    def scale_variable(self, a) -> "Polynomial":
        """Return ``p(a*s)``."""
        return Polynomial(self._c * np.power(complex(a) if np.iscomplexobj(a) else a,
                                              np.arange(len(self._c))))

    # evaluation -----------------------------------------------------------
    def __call__(self, s):
        return np.polyval(self._c[::-1], s)

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, numbers.Number) or np.isscalar(other):
            return Polynomial([other])
        return NotImplemented

    def _addsub(self, other, sign):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._c, other._c
        n = max(len(a), len(b))
        dtype = np.result_type(a, b)
        out = np.zeros(n, dtype=dtype)
        out[: len(a)] += a
        out[: len(b)] += sign * b
        return Polynomial(out, atol=_TRIM_RTOL * _scale(a, b))

    def __add__(self, other):
        return self._addsub(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._addsub(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Polynomial(-self._c)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Polynomial([0.0])
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            return NotImplemented
        return Polynomial(self._c / other)

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.degree < other.degree or self.is_zero:
            return Polynomial([0.0]), self
        q, r = np.polydiv(self._c[::-1], other._c[::-1])
        return Polynomial(q[::-1]), Polynomial(r[::-1], atol=_TRIM_RTOL * _scale(self._c))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, k: int):
        out = Polynomial([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return len(self._c) == len(other._c) and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(tuple(self._c.tolist()))

    def allclose(self, other, rtol=1e-8, atol=1e-10) -> bool:
        other = self._coerce(other)
        n = max(len(self._c), len(other._c))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    # roots ----------------------------------------------------------------
    def raw_roots(self) -> np.ndarray:
        return _raw_roots(self._c)

    def roots(self) -> "RootSet":
        return poly_roots(self)

    def __repr__(self):
        return f"Polynomial({self._c.tolist()!r})"

    def __str__(self):
        return _format_poly(self._c)


def _format_coef(c) -> str:
    if isinstance(c, complex) or np.iscomplexobj(c):
        c = complex(c)
        if c.imag == 0:
            c = c.real
        else:
            return f"({c.real:g}{c.imag:+g}j)"
    return f"{float(c):g}"


def _format_poly(c) -> str:
    terms = []
    for k in range(len(c) - 1, -1, -1):
        if c[k] == 0 and len(c) > 1:
            continue
        coef = _format_coef(c[k])
        if k == 0:
            terms.append(coef)
        elif coef == "1":
            terms.append("s" if k == 1 else f"s^{k}")
        else:
            terms.append(f"{coef}*s" if k == 1 else f"{coef}*s^{k}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


def _raw_roots(c: np.ndarray) -> np.ndarray:
    """Roots via eigenvalues of the (LAPACK-balanced) companion matrix."""
    c = _strip(np.asarray(c))
    if len(c) == 1:
        if c[0] == 0:
            raise ZeroPolynomial("the zero polynomial has no finite root set")
        return np.zeros(0, dtype=complex)
    nz = 0
    while c[nz] == 0:
        nz += 1
    c = c[nz:]
    n = len(c) - 1
    out = np.zeros(nz, dtype=complex)
    if n == 0:
        return out
    if n == 1:
        return np.concatenate([out, [complex(-c[0] / c[1])]])
    comp = np.zeros((n, n), dtype=np.result_type(c, float))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    return np.concatenate([out, np.linalg.eigvals(comp).astype(complex)])


@dataclasses.dataclass(frozen=True)
class RootSet:
    """Roots with multiplicities, sorted by real then imaginary part."""

    roots: tuple = ()

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.roots)

    @property
    def locations(self) -> np.ndarray:
        return np.array([z for z, _ in self.roots], dtype=complex)

    def expanded(self) -> np.ndarray:
        """Every root repeated by its multiplicity."""
        return np.array([z for z, m in self.roots for _ in range(m)], dtype=complex)

    def where(self, predicate) -> "RootSet":
        return RootSet(tuple((z, m) for z, m in self.roots if predicate(z)))

    def unstable(self, tau: float | None = None) -> "RootSet":
        tau = get_tolerances().marginal if tau is None else tau
        return self.where(lambda z: z.real > tau)

    def marginal(self, tau: float | None = None) -> "RootSet":
        tau = get_tolerances().marginal if tau is None else tau
        return self.where(lambda z: abs(z.real) <= tau)

    def closed_rhp(self, tau: float | None = None) -> "RootSet":
        tau = get_tolerances().marginal if tau is None else tau
        return self.where(lambda z: z.real >= -tau)

    def union(self, other: "RootSet") -> "RootSet":
        """Set union of locations keeping the larger multiplicity."""
        tol = get_tolerances().cluster
        merged = list(self.roots)
        for z, m in other.roots:
            for k, (w, n) in enumerate(merged):
                if abs(z - w) <= tol * max(1.0, abs(z)):
                    merged[k] = (w, max(m, n))
                    break
            else:
                merged.append((z, m))
        return RootSet(tuple(sorted(merged, key=_root_key)))

    def __repr__(self):
        parts = []
        for z, m in self.roots:
            loc = f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}j"
            parts.append(loc if m == 1 else f"{loc} (x{m})")
        return "RootSet{" + ", ".join(parts) + "}"


def _root_key(item):
    z = item[0]
    return (round(z.real, 12), round(z.imag, 12))


def _cluster(raw: np.ndarray, rtol: float, real_input: bool) -> RootSet:
    n = len(raw)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(raw[i] - raw[j]) <= rtol * max(1.0, abs(raw[i]), abs(raw[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        z = complex(np.mean(raw[members]))
        if real_input and abs(z.imag) <= rtol * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append((z, len(members)))
    return RootSet(tuple(sorted(out, key=_root_key)))


# --------------------------------------------------------------------------
# module-level operations
# --------------------------------------------------------------------------

def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    """Apply ``op`` in {'add', 'sub', 'mul'} to two polynomials."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def poly_roots(p: Polynomial, rtol: float | None = None) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    Roots closer than ``rtol`` (relative) are merged.  A wider neighbourhood
    of computed roots is merged into one multiple root when ``p`` is flat
    enough at its centroid to have a root of that multiplicity there.  For
    real ``p`` the result is conjugate-closed.
    """
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no finite root set")
    tol = get_tolerances()
    rtol = tol.cluster if rtol is None else rtol
    raw = p.raw_roots()
    out = []
    for comp in _components(raw, _WIDE_RTOL):
        members = raw[comp]
        if len(comp) > 1:
            z = complex(members.mean())
            if _multiplicity_at(p.coefficients, z, tol.root) >= len(comp):
                if p.is_real and abs(z.imag) <= rtol * max(1.0, abs(z)):
                    z = complex(z.real, 0.0)
                out.append((z, len(comp)))
                continue
        out.extend(_cluster(members, rtol, p.is_real).roots)
    return RootSet(tuple(sorted(out, key=_root_key)))


def _components(points: np.ndarray, rtol: float) -> list:
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= rtol * max(1.0, abs(points[i]), abs(points[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def _taylor(c: np.ndarray, z) -> np.ndarray:
    """Taylor coefficients of the polynomial ``c`` (ascending) about ``z``."""
    work = list(c[::-1])
    out = []
    while work:
        acc = work[0]
        quotient = [acc]
        for coef in work[1:]:
            acc = acc * z + coef
            quotient.append(acc)
        out.append(quotient.pop())
        work = quotient
    return np.array(out)


def _multiplicity_at(c: np.ndarray, z, eta: float) -> int:
    """Number of leading Taylor coefficients about ``z`` that are negligible."""
    t = _taylor(c, z)
    w = np.abs(t) * max(1.0, abs(z)) ** np.arange(len(t))
    norm = w.max()
    k = 0
    while k < len(w) - 1 and w[k] <= eta * norm:
        k += 1
    return k


def _deflate(c: np.ndarray, z, k: int) -> np.ndarray:
    for _ in range(k):
        work = c[::-1]
        acc = work[0]
        q = [acc]
        for coef in work[1:-1]:
            acc = acc * z + coef
            q.append(acc)
        c = np.array(q[::-1])
    return c


def poly_gcd(a: Polynomial, b: Polynomial, tol: float | None = None) -> Polynomial:
    """Monic approximate greatest common divisor.

    Roots of ``a`` and ``b`` are grouped into neighbourhoods; inside each,
    candidate locations (raw roots and cluster centroids) are scored by how
    many leading Taylor coefficients of *both* polynomials vanish there
    (relative threshold ``tol``).  Accepted roots are deflated before the
    next candidate is scored.  Testing flatness instead of root distances
    keeps multiple roots intact: their computed roots scatter like
    ``eps**(1/m)`` but the polynomial stays flat at the centroid.
    """
    if a.is_zero and b.is_zero:
        raise ZeroPolynomial("gcd(0, 0) is undefined")
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()
    if a.degree == 0 or b.degree == 0:
        return Polynomial([1.0])
    eta = get_tolerances().root if tol is None else tol
    ra, rb = a.raw_roots(), b.raw_roots()
    pts = np.concatenate([ra, rb])
    from_a = np.arange(len(pts)) < len(ra)
    A, B = a.coefficients, b.coefficients
    common = []
    for comp in _components(pts, _WIDE_RTOL):
        na, nb = int(np.sum(from_a[comp])), int(np.sum(~from_a[comp]))
        if na == 0 or nb == 0:
            continue
        members = pts[comp]
        cands = list(members) + [
            members.mean(),
            pts[comp[from_a[comp]]].mean(),
            pts[comp[~from_a[comp]]].mean(),
        ]
        while na and nb:
            best, best_k, best_res = None, 0, np.inf
            for z in cands:
                k = min(_multiplicity_at(A, z, eta), _multiplicity_at(B, z, eta), na, nb)
                if k == 0:
                    continue
                res = abs(np.polyval(A[::-1], z)) + abs(np.polyval(B[::-1], z))
                if k > best_k or (k == best_k and res < best_res):
                    best, best_k, best_res = z, k, res
            if best is None:
                break
            common.extend([best] * best_k)
            A, B = _deflate(A, best, best_k), _deflate(B, best, best_k)
            na -= best_k
            nb -= best_k
    g = Polynomial.from_roots(common)
    if a.is_real and b.is_real and not g.is_real:
        g = Polynomial(g.coefficients.real)
    return g


def _exact_quotient(p: Polynomial, g: Polynomial) -> Polynomial:
    if g.degree == 0:
        return p / g.leading
    return p // g


# --------------------------------------------------------------------------
# rational functions
# --------------------------------------------------------------------------

class RationalFunction:
    """Reduced ratio ``num(s)/den(s)`` with a monic denominator."""

    __slots__ = ("_num", "_den")

    def __init__(self, num, den=None, *, reduce: bool = True):
        num = num if isinstance(num, Polynomial) else Polynomial(np.atleast_1d(num))
        if den is None:
            den = Polynomial([1.0])
        den = den if isinstance(den, Polynomial) else Polynomial(np.atleast_1d(den))
        if den.is_zero:
            raise DivisionByZeroFunction("denominator is the zero polynomial")
        if num.is_zero:
            num, den = Polynomial([0.0]), Polynomial([1.0])
        elif reduce and den.degree > 0 and num.degree > 0:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = _exact_quotient(num, g), _exact_quotient(den, g)
        lead = den.leading
        if lead != 1:
            num, den = num / lead, den / lead
        self._num, self._den = num, den

    @classmethod
    def constant(cls, value) -> "RationalFunction":
        return cls(Polynomial([value]))

    @classmethod
    def from_coefficients(cls, num: Sequence, den: Sequence) -> "RationalFunction":
        return cls(Polynomial(num), Polynomial(den))

    @property
    def num(self) -> Polynomial:
        return self._num

    @property
    def den(self) -> Polynomial:
        return self._den

    @property
    def is_zero(self) -> bool:
        return self._num.is_zero

    @property
    def is_real(self) -> bool:
        return self._num.is_real and self._den.is_real

    @property
    def relative_degree(self) -> int:
        return self._den.degree - self._num.degree

    @property
    def is_proper(self) -> bool:
        return self.is_zero or self.relative_degree >= 0

    def value_at_infinity(self):
        """Limit as ``|s| -> infinity`` (raises for improper functions)."""
        from .exceptions import ImproperSystem

        if self.is_zero or self.relative_degree > 0:
            return 0.0
        if self.relative_degree < 0:
            raise ImproperSystem("rational function is improper")
        return self._num.leading / self._den.leading

    def poles(self) -> RootSet:
        return poly_roots(self._den)

    def zeros(self) -> RootSet:
        if self.is_zero:
            return RootSet()
        return poly_roots(self._num)

    def shift(self, a) -> "RationalFunction":
        """Return ``f(s + a)``."""
        return RationalFunction(self._num.shift(a), self._den.shift(a), reduce=False)

    def conj(self) -> "RationalFunction":
        return RationalFunction(self._num.conj(), self._den.conj(), reduce=False)

    def __call__(self, s):
        return rat_eval(self, s)

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        if isinstance(other, numbers.Number) or np.isscalar(other):
            return RationalFunction(Polynomial([other]))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        g = poly_gcd(self._den, other._den)
        d1 = _exact_quotient(self._den, g)
        d2 = _exact_quotient(other._den, g)
        num = self._num * d2 + other._num * d1
        return RationalFunction(num, self._den * d2)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self._num, self._den, reduce=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return RationalFunction(Polynomial([0.0]))
        n1, d1, n2, d2 = self._num, self._den, other._num, other._den
        g1 = poly_gcd(n1, d2)
        g2 = poly_gcd(n2, d1)
        n1, d2 = _exact_quotient(n1, g1), _exact_quotient(d2, g1)
        n2, d1 = _exact_quotient(n2, g2), _exact_quotient(d1, g2)
        return RationalFunction(n1 * n2, d1 * d2, reduce=False)

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalFunction":
        if self.is_zero:
            raise DivisionByZeroFunction("reciprocal of the zero function")
        return RationalFunction(self._den, self._num, reduce=False)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, k: int):
        out = RationalFunction.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def allclose(self, other, rtol=1e-8, atol=1e-10) -> bool:
        other = self._coerce(other)
        return self._num.allclose(other._num, rtol, atol) and self._den.allclose(
            other._den, rtol, atol
        )

    def __repr__(self):
        return f"RationalFunction(num={self._num.coefficients.tolist()!r}, den={self._den.coefficients.tolist()!r})"

    def __str__(self):
        if self._den.degree == 0:
            return str(self._num)
        return f"({self._num})/({self._den})"


def rat_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'}; result is reduced."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero:
            raise DivisionByZeroFunction("division by the zero function")
        return a / b
    raise ValueError(f"unknown rational operation {op!r}")


def rat_eval(f: RationalFunction, s):
    """Evaluate ``f`` at complex ``s`` (scalar or array) by Horner's rule.

    ``s = inf`` (or ``complex(inf)``) returns the limit at infinity.
    """
    if np.isscalar(s) and np.isinf(abs(s)):
        return complex(f.value_at_infinity())
    den = f.den(s)
    guard = get_tolerances().pole_guard
    if np.any(np.abs(den) < guard):
        raise PoleEvaluation(f"evaluation at a pole of {f}", s=s)
    return f.num(s) / den
