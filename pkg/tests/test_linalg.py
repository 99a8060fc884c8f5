import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, taylor_expm
from dqdcompile import linalg
from dqdcompile.errors import ValidationError


@pytest.mark.parametrize("d", [2, 4, 8, 16])
@pytest.mark.parametrize("t", [0.3, np.pi / 2, 4.1])
def test_expm_matches_taylor_oracle(rng, d, t):
    H = random_hermitian(rng, d)
    U = linalg.expm_neg_i_Ht(H, t)
    assert np.allclose(U, taylor_expm(-1j * H * t), atol=1e-11)
    assert linalg.is_unitary(U)


def test_expm_zero_time_is_identity(rng):
    H = random_hermitian(rng, 4)
    assert np.allclose(linalg.expm_neg_i_Ht(H, 0.0), np.eye(4), atol=1e-14)


def test_pauli_x_half_period():
    # exp(-i sx pi/2) = -i sx
    assert np.allclose(linalg.expm_neg_i_Ht(linalg.SX, np.pi / 2), -1j * linalg.SX, atol=1e-14)


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        linalg.expm_neg_i_Ht(np.array([[0, 1], [0, 0]]), 1.0)


@pytest.mark.parametrize("bad", [np.ones(3), np.ones((2, 3)), np.array([[np.nan]])])
def test_malformed_matrices_rejected(bad):
    with pytest.raises(ValidationError):
        linalg.as_matrix(bad)


@pytest.mark.parametrize("d", [2, 4, 8])
def test_derivative_matches_central_differences(rng, d):
    H, dH = random_hermitian(rng, d), random_hermitian(rng, d)
    t, h = 1.3, 1e-6
    U, dU = linalg.expm_with_derivative(H, dH, t)
    fd = (linalg.expm_neg_i_Ht(H + h * dH, t) - linalg.expm_neg_i_Ht(H - h * dH, t)) / (2 * h)
    assert np.allclose(U, linalg.expm_neg_i_Ht(H, t))
    assert np.max(np.abs(dU - fd)) < 1e-8


def test_derivative_commuting_direction():
    # dH commutes with H: d/ds exp(-i(H + s H)t) = -i t H U
    H = np.diag([1.0, -0.5, 2.0, 0.0]).astype(complex)
    U, dU = linalg.expm_with_derivative(H, H, 0.7)
    assert np.allclose(dU, -1j * 0.7 * H @ U, atol=1e-13)


def test_derivative_shape_mismatch():
    with pytest.raises(ValidationError):
        linalg.expm_with_derivative(np.eye(2), np.eye(4), 1.0)


def test_kron_orders_q0_leftmost():
    v = linalg.kron(linalg.basis_state("1"), linalg.basis_state("0"))
    assert np.array_equal(v, linalg.basis_state("10"))
    assert linalg.kron(linalg.SX, linalg.I2).shape == (4, 4)


def test_inner_is_conjugate_linear_in_first_argument():
    a = np.array([1j, 0])
    b = np.array([1, 0])
    assert linalg.inner(a, b) == -1j


def test_apply_and_state_validation():
    with pytest.raises(ValidationError):
        linalg.as_state(np.array([1.0, 1.0]))
    with pytest.raises(ValidationError):
        linalg.apply(np.eye(2), np.ones(4))
    with pytest.raises(ValidationError):
        linalg.basis_state("012")
    assert linalg.n_qubits_of(8) == 3
    with pytest.raises(ValidationError):
        linalg.n_qubits_of(6)


def test_process_fidelity_ignores_global_phase(rng):
    U = linalg.expm_neg_i_Ht(random_hermitian(rng, 4), 1.0)
    assert linalg.process_fidelity(U, np.exp(0.7j) * U) == pytest.approx(1.0, abs=1e-14)
    assert linalg.phase_aligned_distance(np.exp(0.7j) * U, U) < 1e-14
    assert linalg.process_fidelity(np.eye(2), linalg.SX) == pytest.approx(0.0)


hermitian_2q = st.builds(
    lambda seed, scale: random_hermitian(np.random.default_rng(seed), 4, scale),
    st.integers(0, 2**32 - 1), st.floats(0.01, 5.0))


@given(H=hermitian_2q, t=st.floats(-10, 10), s=st.floats(-10, 10))
def test_group_property(H, t, s):
    U = linalg.expm_neg_i_Ht
    assert np.allclose(U(H, t) @ U(H, s), U(H, t + s), atol=1e-9)
    assert np.allclose(U(H, -t), U(H, t).conj().T, atol=1e-9)


@given(H=hermitian_2q, t=st.floats(0, 20))
def test_propagator_always_unitary(H, t):
    assert linalg.is_unitary(linalg.expm_neg_i_Ht(H, t))
