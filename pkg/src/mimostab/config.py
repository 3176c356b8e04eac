"""Numerical tolerances shared by every analysis routine.

Tolerances live in a context variable so that a caller (or the CLI) can
override them for one computation without threading a parameter through
every function::

    with use_tolerances(marginal=1e-6):
        verdict = direct_stability(P)
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import os

__all__ = ["Tolerances", "get_tolerances", "use_tolerances", "ENV_TOL_ROOT"]

ENV_TOL_ROOT = "MIMOSTAB_TOL_ROOT"


@dataclasses.dataclass(frozen=True)
class Tolerances:
    """Bundle of tolerances.

    Attributes
    ----------
    root : float
        Absolute distance under which two simple roots are considered equal
        during GCD root matching.
    cluster : float
        Relative distance under which computed roots are merged into one
        root with summed multiplicity.
    pole_guard : float
        Lower bound on ``|den(s)|`` before evaluation is refused.
    marginal : float
        Half-width of the band around the imaginary axis in which a pole is
        reported as marginal instead of stable or unstable.
    winding : float
        Minimum distance between a curve and the encircled point.
    closure : float
        Maximum endpoint gap (relative) accepted when closing curves.
    indent : float
        Radius of the indentation arc around imaginary-axis poles.
    psd : float
        Boundary tolerance on minimum Hermitian eigenvalues.
    """

    root: float = 1e-9
    cluster: float = 1e-7
    pole_guard: float = 1e-12
    marginal: float = 1e-7
    winding: float = 1e-6
    closure: float = 1e-6
    indent: float = 1e-4
    psd: float = 1e-9

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)


def _initial() -> Tolerances:
    tol = Tolerances()
    env = os.environ.get(ENV_TOL_ROOT)
    if env:
        tol = tol.replace(root=float(env))
    return tol


_current: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "mimostab_tolerances", default=_initial()
)


def get_tolerances() -> Tolerances:
    return _current.get()


@contextlib.contextmanager
def use_tolerances(tol: Tolerances | None = None, **overrides):
    """Temporarily replace the active tolerances."""
    base = tol if tol is not None else _current.get()
    token = _current.set(base.replace(**overrides) if overrides else base)
    try:
        yield _current.get()
    finally:
        _current.reset(token)
