
import numpy as np
import pytest
from conftest import rf, siso

from mimostab import (
    PRTier,
    Status,
    TransferMatrix,
    classify_pr,
    direct_stability,
    hermitian_min_eig,
    mixed_check,
    mixed_interconnect,
    passivity_interconnect,
)
from mimostab.exceptions import RepeatedAxisPole, UnstableOperand

EX6 = siso([3, 1, 6], [2, 3, 1])
ONE = TransferMatrix.constant([[1.0]])
LAG = siso([1], [1, 1])
REMARK_A = siso([3, 1], [2, 3, 1])


def test_hermitian_min_eig_examples():
    assert hermitian_min_eig(ONE, 0.7) == pytest.approx(2)
    for w in (0.0, 0.5, 3.0):
        assert hermitian_min_eig(LAG, w) == pytest.approx(2 / (1 + w * w))
    ws = np.linspace(0.5, 1.5, 2001)
    vals = [hermitian_min_eig(EX6, w) for w in ws]
    assert min(vals) == pytest.approx(0, abs=1e-6)
    assert ws[int(np.argmin(vals))] == pytest.approx(1, abs=1e-3)


def test_hermitian_conjugate_symmetry():
    for w in (0.2, 1.3, 7.0):
        assert hermitian_min_eig(EX6, w) == pytest.approx(hermitian_min_eig(EX6, -w), abs=1e-14)


def test_example6_is_pr_not_strong():
    c = classify_pr(EX6)
    assert c.tier is PRTier.PR
    assert abs(abs(c.witnesses["failing_frequency"]) - 1) < 1e-6


def test_unit_gain_strongly_pr():
    c = classify_pr(ONE)
    assert c.tier is PRTier.STRONGLY_PR
    assert c.witnesses["delta"] == pytest.approx(2)


def test_first_order_lag_strictly_not_strongly():
    c = classify_pr(LAG)
    assert c.tier is PRTier.STRICTLY_PR
    assert c.witnesses["epsilon"] > 0


def test_remark_a_is_strong_quoted():
    # G(s - eps) has real part ~ -eps/w^2 at high frequency for every eps > 0
    assert classify_pr(REMARK_A).tier is PRTier.STRONG_QUOTED_PR


def test_integrator_and_axis_poles():
    assert classify_pr(siso([1], [0, 1])).tier is PRTier.PR
    assert classify_pr(siso([0, 1], [1, 0, 1])).tier is PRTier.PR
    assert classify_pr(siso([1], [1, 0, 1])).tier is PRTier.NOT_PR


def test_repeated_axis_pole():
    with pytest.raises(RepeatedAxisPole):
        classify_pr(siso([0, 1], [1, 0, 2, 0, 1]))


def test_unstable_not_pr():
    c = classify_pr(siso([1], [-1, 1]))
    assert c.tier is PRTier.NOT_PR and "failing_pole" in c.witnesses


def test_passivity_interconnect_examples():
    applies, v = passivity_interconnect(EX6, EX6)
    assert not applies and v.status is Status.INCONCLUSIVE
    loop = direct_stability(EX6, EX6)
    assert not loop.is_stable
    assert np.allclose(sorted(loop.witness_poles.locations, key=lambda z: z.imag), [-1j, 1j], atol=1e-6)
    applies, v = passivity_interconnect(EX6, ONE)
    assert applies and v.is_stable and direct_stability(EX6, ONE).is_stable
    applies, v = passivity_interconnect(LAG, LAG)
    assert applies and direct_stability(LAG, LAG).is_stable


def test_mixed_check_examples():
    half = TransferMatrix.constant([[0.5]])
    two = TransferMatrix.constant([[2.0]])
    assert mixed_check(half, 0.1).ok and mixed_check(half, 10).ok
    for c in (0.01, 1, 100):
        assert not mixed_check(two, c).gain_band_ok
    assert mixed_check(REMARK_A, 1.0).ok


def test_mixed_check_requires_stability():
    with pytest.raises(UnstableOperand):
        mixed_check(siso([1], [-1, 1]), 1.0)


def test_mixed_interconnect_examples():
    half = TransferMatrix.constant([[0.5]])
    c, v = mixed_interconnect(half, half)
    assert c is not None and v.is_stable
    c, v = mixed_interconnect(half, TransferMatrix.constant([[2.0]]))
    assert c is None and v.status is Status.INCONCLUSIVE
    c, v = mixed_interconnect(REMARK_A, REMARK_A)
    assert c is not None and v.is_stable and direct_stability(REMARK_A, REMARK_A).is_stable


def _ladder(rng):
    k = rng.uniform(0.1, 5, size=rng.integers(1, 4))
    a = rng.uniform(0.1, 5, size=len(k))
    G = None
    for ki, ai in zip(k, a):
        term = rf([ki], [ai, 1])
        G = term if G is None else G + term
    return TransferMatrix([[G]])


def _weaker_checks_hold(G, tier):
    # re-derive each weaker tier's defining property independently
    w = np.concatenate([-np.geomspace(1e-3, 1e3, 300), np.geomspace(1e-3, 1e3, 300)])
    h = np.array([hermitian_min_eig(G, x) for x in w])
    poles = G.poles().locations
    if tier >= PRTier.PR:
        assert all(z.real <= 1e-9 for z in poles)
        assert np.all(h >= -1e-9)
    if tier >= PRTier.STRONG_QUOTED_PR:
        assert all(z.real < 0 for z in poles)
        assert np.all(h > 0)


@pytest.mark.parametrize("seed", range(20))
def test_ladders_at_least_pr_and_chain_consistent(seed):
    rng = np.random.default_rng(seed)
    G = _ladder(rng)
    c = classify_pr(G)
    assert c.at_least(PRTier.PR)
    _weaker_checks_hold(G, c.tier)


@pytest.mark.parametrize("seed", range(10))
def test_theorem_soundness(seed):
    rng = np.random.default_rng(100 + seed)
    G1, G2 = _ladder(rng), _ladder(rng) + TransferMatrix.constant([[rng.uniform(0, 1)]])
    applies, v = passivity_interconnect(G1, G2)
    if applies:
        assert direct_stability(G1, G2).is_stable
    c, v = mixed_interconnect(G1, G2)
    if c is not None:
        assert direct_stability(G1, G2).is_stable
