import warnings

import numpy as np
import pytest
from conftest import rf, siso
from randsys import clean_plants

from mimostab import (
    Polynomial,
    Status,
    TransferMatrix,
    direct_stability,
    smith_mcmillan,
    theorem1_check,
    unstable_pole_count,
)
from mimostab.exceptions import ZeroMatrix
from mimostab.smith_mcmillan import _gcd_many


def test_scalar_reduces_to_coprime_form():
    form = smith_mcmillan(siso([4, 2], Polynomial.from_roots([-2, 1]).coefficients))
    (eps, psi), = form.factors
    assert eps.allclose(Polynomial([1]))
    assert psi.allclose(Polynomial([-1, 1]))


def test_example1_multiplicities(p1, p2):
    assert unstable_pole_count(p1).unstable_pole_count == 1
    assert unstable_pole_count(p2).unstable_pole_count == 2


def test_stable_diagonal_count():
    P = TransferMatrix.diag([rf([1], [1, 1]), rf([2], [2, 1])])
    assert unstable_pole_count(P).unstable_pole_count == 0


def test_zero_matrix():
    with pytest.raises(ZeroMatrix):
        smith_mcmillan(TransferMatrix.zeros(2))


def test_axis_poles_are_reported_not_counted():
    P = TransferMatrix.diag([rf([1], [0, 1]), rf([1], [-1, 1])])
    with pytest.warns(RuntimeWarning):
        rep = unstable_pole_count(P)
    assert rep.unstable_pole_count == 1
    assert len(rep.marginal_poles) == 1


def test_theorem1_examples(p1, p2, ex3):
    v, hidden = theorem1_check(p1)
    assert v.status is Status.STABLE and not hidden
    v, hidden = theorem1_check(p2)
    assert v.status is Status.UNSTABLE and hidden
    v, hidden = theorem1_check(ex3)
    assert v.status is Status.UNSTABLE and not hidden


def _divides(a, b):
    _, r = divmod(b, a)
    return np.max(np.abs(r.coefficients)) < 1e-8 * (1 + np.max(np.abs(b.coefficients)))


PLANTS = [P for P in clean_plants(23, 40) if P.rows >= 2][:20]


@pytest.mark.parametrize("idx", range(len(PLANTS)))
def test_divisibility_chains(idx):
    form = smith_mcmillan(PLANTS[idx])
    f = form.factors
    for (e1, p1_), (e2, p2_) in zip(f, f[1:]):
        assert _divides(e1, e2)
        assert _divides(p2_, p1_)
    assert form.rank <= min(PLANTS[idx].shape)


@pytest.mark.parametrize("idx", range(len(PLANTS)))
def test_theorem1_matches_oracle(idx):
    P = PLANTS[idx]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert theorem1_check(P)[0].status == direct_stability(P).status


def test_gcd_order_independence():
    polys = [Polynomial.from_roots(r) for r in ([-1, -2, 3], [-1, 3, 5], [3, -1, -1])]
    g1 = _gcd_many(polys)
    g2 = _gcd_many(polys[::-1])
    assert g1.allclose(g2)
    assert g1.allclose(Polynomial.from_roots([-1, 3]))


def test_det_poles_subset_of_mcmillan_poles(p1, p2):
    from mimostab import tm_det

    for P in (p1, p2):
        pole_poly = smith_mcmillan(P).pole_polynomial
        det = tm_det(P)
        _, r = divmod(pole_poly, det.den)
        assert np.max(np.abs(r.coefficients)) < 1e-8
