import math

import numpy as np
import pytest
from conftest import rf, siso
from randsys import random_entry

from mimostab import (
    Status,
    TransferMatrix,
    UncertaintyKind,
    direct_stability,
    hinf_norm,
    perturbed_verdict,
    small_gain_check,
    uncertainty_bound,
    uniform_margins,
)
from mimostab.exceptions import NominalUnstable, UnstableOperand
from mimostab.robustness import sigma_max


def test_norm_of_constant():
    assert hinf_norm(TransferMatrix.constant([[3, 0], [0, 1]])).value == pytest.approx(3)


def test_norm_of_first_order_lag():
    r = hinf_norm(siso([1], [1, 1]))
    assert r.value == pytest.approx(1)
    assert r.peak_frequency == 0 and r.converged


def test_norm_dc_gain():
    assert hinf_norm(siso([100], [2, 1])).value == pytest.approx(50)


def test_norm_resonant_peak():
    # 1/(s^2 + 0.2 s + 1): peak 1/(2*zeta*sqrt(1-zeta^2)) at sqrt(1-2 zeta^2)
    z = 0.1
    r = hinf_norm(siso([1], [1, 2 * z, 1]))
    assert r.value == pytest.approx(1 / (2 * z * math.sqrt(1 - z * z)), rel=1e-6)
    assert abs(r.peak_frequency) == pytest.approx(math.sqrt(1 - 2 * z * z), rel=1e-3)


def test_norm_unstable_operand():
    with pytest.raises(UnstableOperand):
        hinf_norm(siso([1], [-1, 1]))


def test_norm_dominates_samples():
    G = TransferMatrix([[rf([1], [1, 1]), rf([2, 1], [4, 0.5, 1])], [0, rf([1, -1], [2, 1])]])
    r = hinf_norm(G)
    w = np.geomspace(1e-3, 1e3, 2000)
    assert r.value >= sigma_max(G, w).max() * (1 - 1e-9)


def test_norm_tolerance_monotone():
    G = siso([1], [1, 0.3, 1])
    a = hinf_norm(G, rel_tol=1e-3).value
    b = hinf_norm(G, rel_tol=1e-8).value
    assert b >= a - 1e-12
    assert abs(a - b) <= 1e-3 * b


def test_small_gain_applies():
    applies, norm, v = small_gain_check(siso([0.5], [1, 1]), siso([1], [2, 1]))
    assert applies and norm == pytest.approx(0.25) and v.status is Status.STABLE


def test_small_gain_inconclusive():
    two = TransferMatrix.constant([[2.0]])
    applies, norm, v = small_gain_check(two, two)
    assert not applies and norm == pytest.approx(4)
    assert v.status is Status.INCONCLUSIVE
    assert direct_stability(two, two).is_stable


def test_small_gain_grid_screening():
    Y = TransferMatrix.diag([rf([0.3], [1, 1]), rf([0.2], [3, 1])])
    Z = TransferMatrix([[rf([1], [2, 1]), rf([0.5], [1, 1])], [0, rf([1], [1, 1])]])
    applies, _, v = small_gain_check(Y, Z)
    assert applies and v.is_stable and direct_stability(Y, Z).is_stable


def test_bounds_examples(ex5):
    assert uncertainty_bound(TransferMatrix.zeros(1)).bound == pytest.approx(1)
    assert uncertainty_bound(siso([1], [1, 1])).bound == pytest.approx(1)
    m = uncertainty_bound(ex5, UncertaintyKind.MULTIPLICATIVE)
    assert m.bound < 0.05


def test_bounds_need_nominal_stability(ex3):
    with pytest.raises(NominalUnstable):
        uncertainty_bound(ex3)


def test_perturbed_examples(ex4, ex5, p1):
    assert perturbed_verdict(ex4, TransferMatrix.diag([96 / 104, 1])).status is Status.UNSTABLE
    v = perturbed_verdict(ex5, TransferMatrix.constant([[1, 0], [-0.05, 1]]))
    assert v.status is Status.UNSTABLE
    assert np.allclose(v.witness_poles.locations, [(1 + math.sqrt(5)) / 2], atol=1e-8)
    assert perturbed_verdict(p1, TransferMatrix.identity(3)).status == direct_stability(p1).status


def test_fragility_reproduction(ex4, ex5):
    for P, U in ((ex4, TransferMatrix.diag([96 / 104, 1])),
                 (ex5, TransferMatrix.constant([[1, 0], [-0.05, 1]]))):
        m = uniform_margins(P)
        assert math.isinf(m.k2) and m.theta1 >= 3 * math.pi / 4
        assert perturbed_verdict(P, U).status is Status.UNSTABLE


def _stable_pair(rng, n):
    pool = [[-rng.uniform(0.3, 3)], [-rng.uniform(0.3, 3)]]
    mk = lambda: TransferMatrix([[random_entry(rng, pool, 2) for _ in range(n)] for _ in range(n)])
    return mk(), mk()


@pytest.mark.parametrize("seed", range(10))
def test_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    for _ in range(3):
        n = int(rng.integers(1, 3))
        A, B = _stable_pair(rng, n)
        nab = hinf_norm(A @ B).value
        assert nab <= hinf_norm(A).value * hinf_norm(B).value + 1e-8
