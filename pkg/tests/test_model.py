import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqdcompile import linalg, model
from dqdcompile.errors import CapacityError, ConstraintViolation, ValidationError

I, X, Z = linalg.I2, linalg.SX, linalg.SZ


def op_on(op, q, n):
    return linalg.kron(*[op if k == q else I for k in range(n)])


def chain_oracle(J):
    """Chain Hamiltonian assembled term by term from Kronecker products."""
    n = len(J)
    H = sum(J[q] * op_on(Z, q, n) + op_on(X, q, n) for q in range(n))
    for q in range(n - 1):
        H = H + J[q] * J[q + 1] / 4 * op_on(Z - I, q, n) @ op_on(Z - I, q + 1, n)
    return H


def test_h1q_entries():
    assert np.array_equal(model.h1q(0.7), np.array([[0.7, 1], [1, -0.7]]))


@pytest.mark.parametrize("J", [0.0, 0.5, 1.0, 2.3])
@pytest.mark.parametrize("dt", [math.pi / 2, 0.37, 3.0])
def test_native_gate_closed_form(J, dt):
    # (J sz + sx)^2 = (J^2 + 1) I
    w = math.hypot(J, 1.0)
    ref = math.cos(w * dt) * I - 1j * math.sin(w * dt) * model.h1q(J) / w
    assert np.allclose(model.native_1q(J, dt), ref, atol=1e-14)


@pytest.mark.parametrize("k", range(1, 7))
def test_free_evolution_over_pi_multiples(k):
    U = model.native_1q(0.0, k * math.pi)
    assert np.max(np.abs(U - (-1) ** k * I)) <= 1e-12


def test_native_gate_rejects_bad_inputs():
    with pytest.raises(ConstraintViolation):
        model.native_1q(-0.1, 1.0)
    with pytest.raises(ValidationError):
        model.native_1q(1.0, 0.0)


def test_h2q_matches_kronecker_sum():
    J1, J2 = 0.8, 1.7
    ref = (J1 * np.kron(Z, I) + J2 * np.kron(I, Z) + np.kron(X, I) + np.kron(I, X)
           + J1 * J2 / 4 * np.kron(Z - I, Z - I))
    assert np.allclose(model.h2q(J1, J2), ref)


def test_coupling_only_touches_11():
    # (sz - I) x (sz - I) = 4 |11><11|
    delta = model.h2q(1.0, 2.0) - (np.kron(Z, I) + 2 * np.kron(I, Z) + np.kron(X, I) + np.kron(I, X))
    assert np.allclose(delta, np.diag([0, 0, 0, 2.0]))


def test_chain_reduces_to_one_and_two_qubit_forms():
    assert np.allclose(model.chain_hamiltonian([0.4]), model.h1q(0.4))
    assert np.allclose(model.chain_hamiltonian([0.4, 1.1]), model.h2q(0.4, 1.1))


@given(st.lists(st.floats(0, 3), min_size=1, max_size=5))
def test_chain_matches_oracle(J):
    H = model.chain_hamiltonian(J)
    assert np.allclose(H, chain_oracle(J), atol=1e-12)
    assert np.allclose(H, H.conj().T)
    assert np.all(np.isreal(H))


def test_chain_capacity_and_validation():
    with pytest.raises(CapacityError):
        model.ChainSpec(6)
    with pytest.raises(CapacityError):
        model.chain_hamiltonian(np.ones(6))
    with pytest.raises(ConstraintViolation):
        model.chain_hamiltonian([1.0, -0.5])
    with pytest.raises(ValidationError):
        model.chain_hamiltonian([1.0], model.ChainSpec(2))


def test_j_max_only_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model.chain_hamiltonian([5.0, 1.0], model.ChainSpec(2, j_max=2.0))
    assert any("exceeds" in str(w.message) for w in caught)


def test_segment_validation():
    with pytest.raises(ValidationError):
        model.PulseSegment(0.0, (1.0,))
    with pytest.raises(ConstraintViolation):
        model.PulseSegment(1.0, (-1.0,))
    seg = model.PulseSegment(1.0, (None, 2.0))
    assert np.array_equal(seg.strengths, [0.0, 2.0])
    with pytest.raises(ValidationError):
        model.segment_propagator(seg, model.ChainSpec(3))


def test_idle_segment_is_free_evolution_of_every_qubit():
    U = model.segment_propagator(model.PulseSegment(0.3, (None, None)), model.ChainSpec(2))
    single = linalg.expm_neg_i_Ht(X, 0.3)
    assert np.allclose(U, np.kron(single, single))


@given(st.lists(st.floats(0, 3), min_size=2, max_size=4), st.integers(0, 3))
def test_derivative_diagonals_match_finite_difference(J, q):
    q = q % len(J)
    h = 1e-6
    Jp, Jm = np.array(J), np.array(J)
    Jp[q] += h
    Jm[q] -= h
    fd = (model.hamiltonian_diagonals(Jp) - model.hamiltonian_diagonals(Jm))[0] / (2 * h)
    got = model.derivative_diagonals(np.array(J)[None, :], [0], [q])[0]
    assert np.allclose(got, fd, atol=1e-7)
