import numpy as np
import pytest
from conftest import rf, siso
from hypothesis import given, settings
from hypothesis import strategies as st
from randsys import clean_plants

from mimostab import (
    RootSet,
    Status,
    TransferMatrix,
    Verdict,
    closed_loop,
    direct_stability,
    hinf_norm,
    tm_det,
    tm_eval,
    tm_inverse,
)
from mimostab.exceptions import NotSquare, PoleEvaluation, SingularLoop, SingularMatrix


def test_eval_diagonal_at_zero():
    P = TransferMatrix.diag([rf([1], [1, 1]), rf([1], [1, 1])])
    assert np.allclose(tm_eval(P, 0), np.eye(2))


def test_eval_example3_at_zero(ex3):
    assert np.allclose(tm_eval(ex3, 0), [[0, 1], [-3, -3]])


def test_eval_at_pole_reports_entry():
    P = TransferMatrix([[1, rf([1], [1, 1])]])
    with pytest.raises(PoleEvaluation) as info:
        tm_eval(P, -1)
    assert info.value.index == (0, 1)


def test_det_example3(ex3):
    d = tm_det(TransferMatrix.identity(2) + ex3)
    assert d.allclose(rf([1, -5], [1, 1]))


def test_det_requires_square():
    with pytest.raises(NotSquare):
        tm_det(TransferMatrix([[1, 2]]))


def test_inverse_example3(ex3):
    inv = tm_inverse(TransferMatrix.identity(2) + ex3)
    expected = [[rf([2, 2], [-1, 5]), rf([1, 1], [-1, 5])],
                [rf([-3, 3], [-1, 5]), rf([-1, -1], [-1, 5])]]
    # the (2,2) entry of the inverse is -(s+1)/(5s-1)
    for i in range(2):
        for j in range(2):
            assert inv[i, j].allclose(expected[i][j]), (i, j)


def test_inverse_of_identity():
    assert tm_inverse(TransferMatrix.identity(3)).allclose(TransferMatrix.identity(3))


def test_inverse_of_diagonal():
    inv = tm_inverse(TransferMatrix.diag([rf([1], [1, 1]), rf([2], [2, 1])]))
    assert inv.allclose(TransferMatrix.diag([rf([1, 1]), rf([1, 0.5])]))


def test_inverse_singular():
    with pytest.raises(SingularMatrix):
        tm_inverse(TransferMatrix([[rf([1], [1, 1]), 1], [rf([1], [1, 1]), 1]]))


def test_closed_loop_zero_plant():
    S, T = closed_loop(TransferMatrix.zeros(2))
    assert S.allclose(TransferMatrix.identity(2))
    assert T.is_zero


def test_closed_loop_example3_pole(ex3):
    S, _ = closed_loop(ex3)
    assert any(abs(z - 0.2) < 1e-10 for z in S.poles().locations)


def test_closed_loop_siso_nonminimum_phase():
    S, T = closed_loop(siso([1, -2], [1, 1]))
    assert T[0, 0].allclose(rf([1, -2], [2, -1]))


def test_closed_loop_ill_posed():
    with pytest.raises(SingularLoop):
        closed_loop(TransferMatrix.constant([[-1.0]]))


def test_direct_stability_examples(ex3, ex5):
    assert direct_stability(TransferMatrix.diag([rf([1], [1, 1])] * 2)).is_stable
    v = direct_stability(ex3)
    assert v.status is Status.UNSTABLE
    assert np.allclose(v.witness_poles.locations, [0.2], atol=1e-8)
    U = TransferMatrix.constant([[1, 0], [-0.05, 1]])
    assert direct_stability(ex5, U).status is Status.UNSTABLE


def test_verdict_invariants():
    v = Verdict.from_poles(RootSet(((-1 + 0j, 1),)), "t")
    assert v.status is Status.STABLE and len(v.witness_poles) == 0
    v = Verdict.from_poles(RootSet(((1e-9 + 1j, 1), (1e-9 - 1j, 1))), "t")
    assert v.status is Status.MARGINAL
    v = Verdict.from_poles(RootSet(((1e-9 + 1j, 1), (0.5 + 0j, 1))), "t")
    assert v.status is Status.UNSTABLE


# properties --------------------------------------------------------------

PLANTS = clean_plants(11, 40)


@pytest.mark.parametrize("idx", range(0, 40, 2))
def test_sensitivity_plus_complementary_is_identity(idx):
    P = PLANTS[idx]
    S, T = closed_loop(P)
    pts = 1j * np.array([0.3, 1.7, 12.0])
    diff = S.freqresp(pts) + T.freqresp(pts) - np.eye(P.rows)
    assert np.max(np.abs(diff)) < 1e-8


@pytest.mark.parametrize("idx", range(1, 40, 2))
def test_symbolic_and_numeric_determinant_agree(idx):
    P = PLANTS[idx]
    d = tm_det(TransferMatrix.identity(P.rows) + P)
    for w in (0.0, 0.5, 3.0, 40.0):
        num = np.linalg.det(np.eye(P.rows) + tm_eval(P, 1j * w))
        assert abs(d(1j * w) - num) <= 1e-6 * max(1.0, abs(num))


@pytest.mark.parametrize("idx", range(10))
def test_double_inverse(idx):
    P = PLANTS[idx] + TransferMatrix.identity(PLANTS[idx].rows)
    back = tm_inverse(tm_inverse(P))
    pts = np.array([0.4 + 0.9j, -0.3 + 2j])
    assert np.allclose(back.freqresp(pts), P.freqresp(pts), rtol=1e-7, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(-1, 1))
def test_small_gain_sanity(g, a, b, c):
    P = TransferMatrix([[rf([g * a], [a, 1]), rf([c * g * b / 4], [b, 1])],
                        [rf([0.0]), rf([g * b / 2], [b, 1])]])
    if hinf_norm(P).value < 1:
        assert direct_stability(P).is_stable
