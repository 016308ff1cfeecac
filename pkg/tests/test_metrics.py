import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import brute_force_metrics
from rrcml.metrics import CRITERIA, HIGHER_BETTER, direction, evaluate_all


def test_single_instance():
    r = evaluate_all([[1, 1, 1]], [[1, 0, 1]])
    assert r.hamming == pytest.approx(1 / 3)
    assert r.zero_one == 1.0
    assert r.ex_fdr == pytest.approx(1 / 3)
    assert r.ex_fnr == 0.0
    assert r.ex_f1 == pytest.approx(0.8)


def test_perfect_prediction():
    Y = np.array([[1, 0], [0, 0], [1, 1]])
    assert evaluate_all(Y, Y).as_tuple() == (0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1)


def test_two_by_two():
    r = evaluate_all([[1, 1], [0, 0]], [[1, 0], [0, 1]])
    assert (r.mi_fdr, r.mi_fnr, r.mi_f1) == (0.5, 0.5, 0.5)
    assert r.ma_f1 == 0.5


def test_all_empty_rows_are_perfect():
    r = evaluate_all(np.zeros((3, 2)), np.zeros((3, 2)))
    assert r.ex_f1 == 1.0 and r.ex_fdr == 0.0 and r.ex_fnr == 0.0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        evaluate_all(np.zeros((2, 3)), np.zeros((2, 2)))


def test_directions():
    assert len(CRITERIA) == 11
    assert HIGHER_BETTER == {"ex_f1", "ma_f1", "mi_f1"}
    assert direction("hamming") == "lower" and direction("mi_f1") == "higher"


bits = st.integers(1, 8).flatmap(lambda n: st.integers(1, 4).flatmap(
    lambda l: st.tuples(hnp.arrays(np.int8, (n, l), elements=st.integers(0, 1)),
                        hnp.arrays(np.int8, (n, l), elements=st.integers(0, 1)))))


@settings(max_examples=200, deadline=None)
@given(bits)
def test_matches_brute_force(pair):
    pred, truth = pair
    np.testing.assert_allclose(evaluate_all(pred, truth).as_tuple(),
                               brute_force_metrics(pred, truth), rtol=0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(bits, st.randoms(use_true_random=False))
def test_invariants(pair, rnd):
    pred, truth = pair
    r = evaluate_all(pred, truth)
    assert all(0.0 <= v <= 1.0 for v in r.as_tuple())
    assert r.hamming <= r.zero_one
    perm = list(range(pred.shape[1]))
    rnd.shuffle(perm)
    np.testing.assert_allclose(evaluate_all(pred[:, perm], truth[:, perm]).as_tuple(),
                               r.as_tuple(), atol=1e-15)
    if truth.any():
        assert (r.mi_f1 == 1.0) == bool(np.array_equal(pred, truth))
