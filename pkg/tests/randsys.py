"""Random transfer matrices for property tests.

Entries share a small pool of poles so the common denominator (and hence
the Smith-McMillan computation) stays low-degree.
"""

from __future__ import annotations

import numpy as np

from mimostab import Polynomial, RationalFunction, TransferMatrix
from mimostab.exceptions import MimoStabError
from mimostab.tfmatrix import closed_loop


def _pole_pool(rng, unstable_prob=0.3):
    pool = []
    for _ in range(rng.integers(1, 3)):
        re = rng.uniform(0.2, 3.0) * (1 if rng.random() < unstable_prob else -1)
        if rng.random() < 0.3:
            im = rng.uniform(0.3, 3.0)
            pool.append([complex(re, im), complex(re, -im)])
        else:
            pool.append([re])
    return pool


def random_entry(rng, pool, max_degree=3, zero_prob=0.2):
    if rng.random() < zero_prob:
        return RationalFunction(Polynomial([0.0]))
    roots = []
    for group in pool:
        if rng.random() < 0.6 and len(roots) + len(group) <= max_degree:
            roots.extend(group)
    den = Polynomial.from_roots(roots) if roots else Polynomial([1.0])
    nd = int(rng.integers(0, den.degree + 1))
    num = Polynomial(np.round(rng.normal(size=nd + 1) * 2, 3))
    return RationalFunction(num, den)


def random_plant(rng, n=None, max_degree=3, unstable_prob=0.3):
    n = int(rng.integers(1, 4)) if n is None else n
    pool = _pole_pool(rng, unstable_prob)
    return TransferMatrix([[random_entry(rng, pool, max_degree) for _ in range(n)] for _ in range(n)])


def is_clean(P, axis_gap=1e-2, closed_gap=1e-3):
    """Well-posed and comfortably away from every marginal situation."""
    if P.is_zero:
        return False
    if any(abs(z.real) < axis_gap for z in P.poles().locations):
        return False
    D = P.value_at_infinity()
    if abs(np.linalg.det(np.eye(P.rows) + D)) < 1e-3:
        return False
    try:
        S, _ = closed_loop(P)
    except MimoStabError:
        return False
    return not any(abs(z.real) < closed_gap for z in S.poles().locations)


def clean_plants(seed, count, **kw):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        P = random_plant(rng, **kw)
        if is_clean(P):
            out.append(P)
    return out
