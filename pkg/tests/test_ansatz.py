import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqdcompile import ansatz, kernels, linalg, model
from dqdcompile.ansatz import AnsatzSpec, Fixed, Idle, OneQubit, Param, Slice, TwoQubit
from dqdcompile.errors import ConstraintViolation, StructuralError, ValidationError
from dqdcompile.states import random_states


def test_single_qubit_template():
    spec = ansatz.single_qubit_ansatz()
    assert spec.n_params == 12
    assert spec.total_duration == pytest.approx(6 * math.pi)


def test_single_qubit_unitary_is_product_of_native_gates(rng):
    spec = ansatz.single_qubit_ansatz()
    p = rng.uniform(0, 2, 12)
    ref = np.eye(2)
    for J in p:
        ref = model.native_1q(J, math.pi / 2) @ ref
    assert np.allclose(ansatz.evaluate(spec, p), ref, atol=1e-12)


def test_all_zero_pulses_give_identity():
    spec = ansatz.single_qubit_ansatz()
    assert np.allclose(ansatz.evaluate(spec, np.zeros(12)), np.eye(2), atol=1e-12)  # 6 pi of sx


def test_two_qubit_template_layout():
    spec = ansatz.two_qubit_ansatz()
    assert spec.n_params == 84
    assert spec.total_duration == pytest.approx(6 * math.pi)
    assert len(spec.slices) == 44
    eg = spec.slices[20:24]
    assert [sl.dt for sl in eg] == [math.pi / 2] * 4
    assert all(isinstance(sl.slots[0], TwoQubit) for sl in eg)
    assert isinstance(eg[0].slots[0].bindings[0], Fixed)
    assert isinstance(eg[3].slots[0].bindings[1], Fixed)


def test_two_qubit_slices_use_coupled_hamiltonian(rng):
    spec = ansatz.two_qubit_ansatz()
    p = rng.uniform(0, 2, 84)
    J = ansatz.pulse_matrix(spec, p)
    ref = np.eye(4)
    for s, sl in enumerate(spec.slices):
        ref = linalg.expm_neg_i_Ht(model.h2q(*J[s]), sl.dt) @ ref
    assert np.allclose(ansatz.evaluate(spec, p), ref, atol=1e-11)


@pytest.mark.parametrize("n", [1, 3, 5, 11])
def test_non_pi_multiple_duration_rejected(n):
    with pytest.raises(StructuralError):
        ansatz.single_qubit_ansatz(n)


def test_structural_validation():
    with pytest.raises(StructuralError):  # qubit 1 uncovered
        AnsatzSpec(2, [Slice(math.pi, (OneQubit(0, Param(0)),))])
    with pytest.raises(StructuralError):  # sparse indices
        AnsatzSpec(1, [Slice(math.pi, (OneQubit(0, Param(1)),))])
    with pytest.raises(StructuralError):
        TwoQubit((0, 2), (Fixed(1.0), Param(0)))
    with pytest.raises(StructuralError):
        TwoQubit((0, 1), (Param(0), Param(1)))
    with pytest.raises(ConstraintViolation):
        AnsatzSpec(1, [Slice(math.pi, (OneQubit(0, Fixed(-1.0)),))])


def test_param_validation():
    spec = ansatz.single_qubit_ansatz()
    with pytest.raises(ValidationError):
        ansatz.evaluate(spec, np.ones(11))
    with pytest.raises(ConstraintViolation):
        ansatz.evaluate(spec, -np.ones(12))
    with pytest.raises(ValidationError):
        ansatz.evaluate(spec, np.full(12, np.nan))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_idle_pi_multiple_preserves_gate(k, rng):
    spec = ansatz.two_qubit_ansatz()
    p = rng.uniform(0, 2, 84)
    padded = ansatz.append_idle(spec, k * math.pi)
    assert padded.n_params == 84
    assert linalg.process_fidelity(ansatz.evaluate(spec, p), ansatz.evaluate(padded, p)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("which", ["1q", "2q"])
def test_jacobian_matches_central_differences(which, rng):
    spec = ansatz.single_qubit_ansatz() if which == "1q" else ansatz.two_qubit_ansatz()
    p = rng.uniform(0.1, 2, spec.n_params)
    psi = random_states(spec.n_qubits, 1, rng)[0]
    out, jac = ansatz.evaluate_with_jacobian(spec, p, psi)
    assert np.allclose(out, ansatz.evaluate(spec, p) @ psi)
    h = 1e-6
    for k in rng.choice(spec.n_params, 6, replace=False):
        e = np.zeros_like(p)
        e[k] = h
        fd = (ansatz.evaluate(spec, p + e) @ psi - ansatz.evaluate(spec, p - e) @ psi) / (2 * h)
        assert np.linalg.norm(jac[k] - fd) <= 1e-6 * max(np.linalg.norm(fd), 1e-3)


def test_jacobian_rejects_wrong_state():
    with pytest.raises(ValidationError):
        ansatz.evaluate_with_jacobian(ansatz.single_qubit_ansatz(), np.ones(12), np.ones(4))


def test_serialisation_round_trip():
    for spec in (ansatz.single_qubit_ansatz(), ansatz.two_qubit_ansatz(),
                 ansatz.append_idle(ansatz.single_qubit_ansatz(), math.pi)):
        again = ansatz.spec_from_dict(ansatz.spec_to_dict(spec))
        assert again == spec
        assert again.n_params == spec.n_params


def test_mixed_slice_with_idle_qubit(rng):
    spec = AnsatzSpec(2, [Slice(math.pi, (OneQubit(0, Param(0)), Idle(1)))])
    p = np.array([0.8])
    ref = np.kron(model.native_1q(0.8, math.pi), model.native_1q(0.0, math.pi))
    assert np.allclose(ansatz.evaluate(spec, p), ref, atol=1e-12)


@given(st.lists(st.floats(0, 4), min_size=12, max_size=12))
def test_evaluate_is_unitary(p):
    for b in kernels.available_backends():
        with kernels.use_backend(b):
            assert linalg.is_unitary(ansatz.evaluate(ansatz.single_qubit_ansatz(), np.array(p)))
