import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from tvmpc.model import (
    AxisState,
    ModelDomainError,
    PendulumParams,
    dcm_of_state,
    discretize,
    natural_frequency,
    transition_matrices,
    zmp_of_state,
)

W0 = 3.132092
finite = st.floats(-10, 10, allow_nan=False)


def test_natural_frequency_flat():
    assert natural_frequency(PendulumParams(1.0)) == pytest.approx(W0, abs=1e-6)


def test_natural_frequency_derived_value():
    # independent scalar evaluation of sqrt((g + zdd) / h)
    expected = (9.86 / 0.9) ** 0.5
    got = natural_frequency(PendulumParams(0.9, 0.05))
    assert got == pytest.approx(expected, rel=1e-15)
    assert got == pytest.approx(3.309918, abs=1e-6)


@pytest.mark.parametrize("h, zdd", [(1.0, -9.81), (0.0, 0.0), (-1.0, 0.0), (1.0, -20.0)])
def test_natural_frequency_domain_errors(h, zdd):
    with pytest.raises(ModelDomainError):
        natural_frequency(PendulumParams(h, zdd))


def test_axis_state_rejects_non_finite():
    with pytest.raises(ValueError):
        AxisState(float("nan"))
    s = AxisState.from_array([1, 2, 3])
    assert np.array_equal(s.as_array(), [1.0, 2.0, 3.0])


def test_discretize_closed_forms():
    m = discretize(0.02, W0)
    np.testing.assert_allclose(m.A[0], [1.0, 0.02, 2.0e-4], rtol=0, atol=1e-18)
    np.testing.assert_allclose(m.B, [0.02**3 / 6, 2.0e-4, 0.02], rtol=1e-15)
    np.testing.assert_allclose(discretize(1.0, W0).B, [1 / 6, 1 / 2, 1])
    assert np.array_equal(discretize(0.02, 2.0).A, discretize(0.02, 4.0).A)


def test_discretize_matches_matrix_exponential():
    # ZOH of d/dt [p, v, a] = [v, a, u]
    Ac = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=float)
    Bc = np.array([[0], [0], [1]], dtype=float)
    M = np.zeros((4, 4))
    M[:3, :3], M[:3, 3:] = Ac, Bc
    E = expm(M * 0.02)
    A, B = transition_matrices(0.02)
    np.testing.assert_allclose(A, E[:3, :3], atol=1e-15)
    np.testing.assert_allclose(B, E[:3, 3], atol=1e-15)


def test_output_row_is_zmp():
    m = discretize(0.02, W0)
    np.testing.assert_allclose(m.C, [1.0, 0.0, -1.0 / W0**2])
    x = np.array([0.1, 0.0, 0.981])
    assert m.output(x) == pytest.approx(zmp_of_state(AxisState(*x), W0))


def test_discretize_rejects_bad_inputs():
    with pytest.raises(ValueError):
        discretize(0.0, W0)
    with pytest.raises(ValueError):
        discretize(0.02, 0.0)


def test_zmp_examples():
    assert zmp_of_state(AxisState(0.0, 1.0, 0.0), 3.132) == 0.0
    w = math.sqrt(9.81)
    assert zmp_of_state(AxisState(0.1, 0.0, 0.981), w) == pytest.approx(0.0, abs=1e-15)
    assert zmp_of_state(AxisState(0.2), 7.0) == 0.2


def test_dcm_examples():
    assert dcm_of_state(AxisState(), W0) == 0.0
    assert dcm_of_state(AxisState(0.1, 0.313209), W0) == pytest.approx(0.2, abs=1e-6)
    assert dcm_of_state(AxisState(0.2, -0.626418), W0) == pytest.approx(0.0, abs=1e-6)


@given(finite, finite, finite, finite, finite, finite, st.floats(2.0, 5.0))
def test_zmp_and_dcm_are_linear(p1, v1, a1, p2, v2, a2, w):
    s1, s2 = AxisState(p1, v1, a1), AxisState(p2, v2, a2)
    s12 = AxisState(p1 + p2, v1 + v2, a1 + a2)
    assert zmp_of_state(s12, w) == pytest.approx(zmp_of_state(s1, w) + zmp_of_state(s2, w), abs=1e-9)
    assert dcm_of_state(s12, w) == pytest.approx(dcm_of_state(s1, w) + dcm_of_state(s2, w), abs=1e-9)


@given(finite, finite, finite, st.floats(1e-3, 0.5))
def test_semigroup_zero_input(p, v, a, T):
    x = np.array([p, v, a])
    one = discretize(T, W0)
    two = discretize(2 * T, W0)
    np.testing.assert_allclose(one.step(one.step(x, 0.0), 0.0), two.step(x, 0.0), atol=1e-9)


@given(finite, finite, st.floats(2.0, 5.0))
def test_zmp_equals_pos_without_acc(p, v, w):
    assert zmp_of_state(AxisState(p, v, 0.0), w) == p
