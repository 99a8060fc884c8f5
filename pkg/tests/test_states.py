import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dqdcompile import states
from dqdcompile.errors import ValidationError

angle = st.floats(0, 2 * math.pi)


def test_u3_state_closed_form():
    v = states.u3_state(math.pi / 3, 0.4, 1.1)
    assert np.allclose(v, [math.cos(math.pi / 6), np.exp(0.4j) * math.sin(math.pi / 6)])


def test_u3_is_unitary():
    U = states.u3(0.3, 1.2, -0.7)
    assert np.allclose(U.conj().T @ U, np.eye(2))


@given(angle, angle, angle)
def test_u3_states_normalised(t, p, l):
    assert np.linalg.norm(states.u3_state(t, p, l)) == pytest.approx(1.0)


@given(st.floats(0, math.pi), st.tuples(angle, angle, angle), st.tuples(angle, angle, angle))
def test_two_qubit_schmidt_coefficients(ts, a, b):
    v = states.two_qubit_state(ts, a, b)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    sv = np.linalg.svd(v.reshape(2, 2), compute_uv=False)
    assert np.allclose(sorted(sv), sorted([abs(math.cos(ts / 2)), abs(math.sin(ts / 2))]), atol=1e-12)


def test_product_state_when_theta_zero():
    v = states.two_qubit_state(0.0, (0.5, 0.1, 0.2), (1.0, 0.3, 0.4))
    assert np.allclose(v, np.kron(states.u3_state(0.5, 0.1, 0.2), states.u3_state(1.0, 0.3, 0.4)))


@pytest.mark.parametrize("n", [1, 2])
def test_sample_sets_reproducible_and_independent(n):
    tr, va = states.sample_sets(n, 30, 20, seed=7)
    tr2, va2 = states.sample_sets(n, 30, 20, seed=7)
    assert np.array_equal(tr.states, tr2.states) and np.array_equal(va.states, va2.states)
    assert tr.states.shape == (30, 2**n) and len(va) == 20
    assert not np.allclose(tr.states[:20], va.states)
    assert np.allclose(np.linalg.norm(tr.states, axis=1), 1)
    other, _ = states.sample_sets(n, 30, 20, seed=8)
    assert not np.allclose(other.states, tr.states)


def test_single_qubit_samples_cover_bloch_sphere():
    tr, _ = states.sample_sets(1, 2000, 1, seed=0)
    z = np.abs(tr.states[:, 0]) ** 2 - np.abs(tr.states[:, 1]) ** 2
    assert z.min() < -0.95 and z.max() > 0.95


def test_sampler_validation():
    with pytest.raises(ValidationError):
        states.sample_sets(3)
    with pytest.raises(ValidationError):
        states.sample_sets(1, 0, 5)
