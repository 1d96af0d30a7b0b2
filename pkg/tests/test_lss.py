import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scalar_system, zero_system
from switchid import (DimensionError, HybridWord, SwitchedLinearSystem,
                      check_l1_stability_sufficient, check_reversible,
                      matrix_product_along_word, simulate)


def test_shape_validation():
    with pytest.raises(DimensionError):
        SwitchedLinearSystem(A=[np.eye(2), np.eye(3)], B=[np.ones((2, 1))] * 2,
                             C=[np.ones((1, 2))] * 2)
    with pytest.raises(DimensionError):
        SwitchedLinearSystem(A=[np.eye(2)], B=[np.ones((3, 1))], C=[np.ones((1, 2))])
    with pytest.raises(ValueError):
        SwitchedLinearSystem(A=[np.nan], B=[1.0], C=[1.0])


def test_matrices_are_readonly(scalar):
    with pytest.raises(ValueError):
        scalar.A[0, 0, 0] = 9.0


def test_product_empty_word_is_identity(scalar):
    assert np.array_equal(matrix_product_along_word(scalar, ()), np.eye(1))


def test_product_scalar(scalar):
    got = matrix_product_along_word(scalar, (1, 2))
    assert got == pytest.approx(np.array([[0.12]]))


def test_product_noncommuting_order(rng):
    # oracle: direct matrix multiplication, first letter acts first
    A1 = np.array([[0.0, 1.0], [0.0, 0.0]])
    A2 = np.array([[1.0, 0.0], [1.0, 1.0]])
    sys = SwitchedLinearSystem(A=[A1, A2], B=[np.ones((2, 1))] * 2,
                               C=[np.ones((1, 2))] * 2)
    got = matrix_product_along_word(sys, (1, 2))
    assert np.allclose(got, A2 @ A1)
    assert not np.allclose(A2 @ A1, A1 @ A2)


@settings(max_examples=25)
@given(st.data())
def test_product_concatenation_reverses_to_multiplication(data):
    gen = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    sys = SwitchedLinearSystem(A=list(gen.standard_normal((2, 3, 3))),
                               B=list(gen.standard_normal((2, 3, 1))),
                               C=list(gen.standard_normal((2, 1, 3))))
    v = tuple(data.draw(st.lists(st.integers(1, 2), max_size=5)))
    w = tuple(data.draw(st.lists(st.integers(1, 2), max_size=5)))
    left = matrix_product_along_word(sys, v + w)
    right = matrix_product_along_word(sys, w) @ matrix_product_along_word(sys, v)
    assert np.allclose(left, right, atol=1e-12)


def test_simulate_first_output_is_zero(scalar):
    w = HybridWord.from_letters([(2, 7.0)])
    assert simulate(scalar, w).outputs[0] == pytest.approx(0.0)


def test_simulate_hand_example(scalar):
    # x1 = B_1*2 = 2, y1 = C_2*x1 = 6
    w = HybridWord.from_letters([(1, 2.0), (2, 5.0)])
    traj = simulate(scalar, w)
    assert traj.outputs[-1] == pytest.approx(6.0)


def test_simulate_three_step_example(scalar):
    # x1 = 1, x2 = 0.3*1 + 2*1 = 2.3, y2 = C_1*x2 = 2.3
    w = HybridWord.from_letters([(1, 1.0), (2, 1.0), (1, 1.0)])
    traj = simulate(scalar, w)
    assert traj.outputs[-1] == pytest.approx(2.3)
    assert traj.states.shape == (4, 1)
    assert traj.outputs.shape == (3, 1)


def test_simulate_empty_word(scalar):
    traj = simulate(scalar, HybridWord.empty(1), x_init=np.array([5.0]))
    assert traj.states.shape == (1, 1)
    assert traj.outputs.shape == (0, 1)
    assert traj.states[0, 0] == 5.0


def test_simulate_dimension_mismatch(scalar):
    w = HybridWord(np.array([1]), np.ones((1, 2)))
    with pytest.raises(DimensionError):
        simulate(scalar, w)


def test_prefix_consistency(scalar, rng):
    w = HybridWord(rng.integers(1, 3, size=12), rng.standard_normal((12, 1)))
    full = simulate(scalar, w).outputs
    for k in range(len(w) + 1):
        part = simulate(scalar, w.prefix(k)).outputs
        assert np.array_equal(part, full[:k])


def test_zero_input_zero_state(rng):
    sys = zero_system(n=2, m=1, p=1, D=2)
    sys2 = SwitchedLinearSystem(A=list(rng.standard_normal((2, 2, 2))),
                                B=list(rng.standard_normal((2, 2, 1))),
                                C=list(rng.standard_normal((2, 1, 2))))
    w = HybridWord(rng.integers(1, 3, size=9), np.zeros((9, 1)))
    for s in (sys, sys2):
        traj = simulate(s, w)
        assert np.all(traj.states == 0.0)
        assert np.all(traj.outputs == 0.0)


def test_linearity_in_input(rng):
    sys = SwitchedLinearSystem(A=list(rng.standard_normal((2, 3, 3)) * 0.4),
                               B=list(rng.standard_normal((2, 3, 2))),
                               C=list(rng.standard_normal((2, 2, 3))))
    modes = rng.integers(1, 3, size=10)
    U1 = rng.standard_normal((10, 2))
    U2 = rng.standard_normal((10, 2))
    a, b = 1.7, -0.6
    out = simulate(sys, HybridWord(modes, a * U1 + b * U2)).outputs
    out1 = simulate(sys, HybridWord(modes, U1)).outputs
    out2 = simulate(sys, HybridWord(modes, U2)).outputs
    assert np.max(np.abs(out - (a * out1 + b * out2))) <= 1e-12


def test_l1_sufficient_examples():
    assert check_l1_stability_sufficient(scalar_system())
    assert not check_l1_stability_sufficient(
        SwitchedLinearSystem(A=[0.6, 0.3], B=[1.0, 1.0], C=[1.0, 1.0]))
    sys3 = SwitchedLinearSystem(A=[0.33 * np.eye(2)] * 3,
                                B=[np.ones((2, 1))] * 3, C=[np.ones((1, 2))] * 3)
    assert check_l1_stability_sufficient(sys3)


def test_reversible_examples():
    assert check_reversible(SwitchedLinearSystem(A=[2.0, 0.5], B=[1.0, 1.0],
                                                 C=[1.0, 1.0]))
    assert not check_reversible(SwitchedLinearSystem(A=[0.0], B=[1.0], C=[1.0]))
    # rank-1 2x2 matrix: rank oracle says singular
    M = np.outer([1.0, 2.0], [3.0, 4.0])
    assert np.linalg.matrix_rank(M) == 1
    sysr1 = SwitchedLinearSystem(A=[M], B=[np.ones((2, 1))], C=[np.ones((1, 2))])
    assert not check_reversible(sysr1)


def test_hybrid_word_roundtrips():
    w = HybridWord.from_letters([(1, [0.5, -1.0]), (2, [0.0, 2.0])])
    assert len(w) == 2
    assert w.m == 2
    assert w.mode_word() == (1, 2)
    both = HybridWord.concat([w, w])
    assert len(both) == 4
    assert np.array_equal(both.inputs[:2], w.inputs)
