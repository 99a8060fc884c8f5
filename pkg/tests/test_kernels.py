import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from dqdcompile import ansatz, kernels, model
from dqdcompile.states import random_states

BACKENDS = kernels.available_backends()


def augmented_derivative(H, dH, t):
    d = H.shape[0]
    aug = np.block([[-1j * t * H, -1j * t * dH], [np.zeros((d, d)), -1j * t * H]])
    return scipy.linalg.expm(aug)[:d, d:]


@pytest.fixture(params=["1q", "2q"])
def spec(request):
    return ansatz.single_qubit_ansatz() if request.param == "1q" else ansatz.two_qubit_ansatz()


def test_numpy_backend_always_present():
    assert "numpy" in BACKENDS
    assert kernels.active_backend() in BACKENDS


def test_unknown_backend():
    with pytest.raises(ValueError):
        with kernels.use_backend("fortran"):
            pass


@pytest.mark.parametrize("backend", BACKENDS)
def test_slice_derivatives_match_augmented_block(backend, spec, rng):
    params = rng.uniform(0, 2, spec.n_params)
    with kernels.use_backend(backend):
        prop = ansatz.propagate(spec, params)
        dU = prop.derivatives(spec)
    lay = spec.layout
    _, _, xsum = model.chain_operators(spec.n_qubits)
    dh = model.derivative_diagonals(prop.J, lay.term_slice, lay.term_qubit)
    for k in range(0, len(lay.term_slice), 7):
        s = lay.term_slice[k]
        H = xsum + np.diag(model.hamiltonian_diagonals(prop.J[s])[0])
        ref = augmented_derivative(H, np.diag(dh[k]), lay.dt[s])
        assert np.max(np.abs(dU[k] - ref)) < 1e-11


@pytest.mark.parametrize("backend", BACKENDS)
def test_degenerate_spectrum_derivative(backend):
    # J = 0 on two idle-like qubits gives degenerate eigenvalues
    J = np.zeros((1, 2))
    _, _, xsum = model.chain_operators(2)
    with kernels.use_backend(backend):
        U, W, V = kernels.propagators(model.hamiltonian_diagonals(J), xsum, np.array([math.pi / 2]))
        dh = model.derivative_diagonals(J, [0], [0])
        dU = kernels.derivatives(W, V, np.array([math.pi / 2]), np.array([0, 1]), dh)
    ref = augmented_derivative(xsum.astype(complex), np.diag(dh[0]), math.pi / 2)
    assert np.max(np.abs(dU[0] - ref)) < 1e-12


@pytest.mark.skipif(len(BACKENDS) < 2, reason="numba disabled")
@given(seed=st.integers(0, 2**31), which=st.sampled_from(["1q", "2q"]))
def test_backends_agree(seed, which):
    spec = ansatz.single_qubit_ansatz() if which == "1q" else ansatz.two_qubit_ansatz()
    rng = np.random.default_rng(seed)
    params = rng.uniform(0, 3, spec.n_params)
    psi = random_states(spec.n_qubits, 3, rng)
    out = {}
    for b in BACKENDS:
        with kernels.use_backend(b):
            prop = ansatz.propagate(spec, params)
            dU = prop.derivatives(spec)
            lay = spec.layout
            ov, g = kernels.loss_grad(prop.U, dU, lay.term_start, lay.term_param, spec.n_params, psi, psi[::-1])
            o, jac = kernels.state_jacobian(prop.U, dU, lay.term_start, lay.term_param, spec.n_params, psi[0])
            out[b] = (kernels.chain_product(prop.U), kernels.evolve(prop.U, psi), ov, g, o, jac)
    for a, b in zip(*out.values()):
        assert np.allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_evolve_matches_product(backend, rng):
    spec = ansatz.two_qubit_ansatz()
    params = rng.uniform(0, 2, spec.n_params)
    psi = random_states(2, 5, rng)
    with kernels.use_backend(backend):
        U = ansatz.propagate(spec, params).U
        total = kernels.chain_product(U)
        assert np.allclose(kernels.evolve(U, psi), psi @ total.T, atol=1e-12)


def test_env_flag_disables_numba():
    import os
    import subprocess
    import sys
    code = ("from dqdcompile import kernels, ansatz; import numpy as np;"
            "print(kernels.available_backends(), kernels.active_backend());"
            "ansatz.evaluate(ansatz.single_qubit_ansatz(), np.ones(12))")
    env = {**os.environ, "DQDCOMPILE_DISABLE_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "['numpy'] numpy"
