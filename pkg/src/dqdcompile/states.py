"""Random pure states for training and validation.

Single-qubit states come from the U3 circuit applied to ``|0>``. Two-qubit
states use a Schmidt-form circuit (``Ry`` on q0, ``CX`` q0->q1, then local
U3 rotations), which reaches every two-qubit pure state up to global phase.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class StateSet:
    states: np.ndarray  # (N, 2**n) rows are normalized states
    seed: int
    role: str

    def __len__(self):
        return self.states.shape[0]

    def __iter__(self):
        return iter(self.states)


def u3(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
    ])


def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def u3_state(theta, phi, lam):
    """``U3(theta, phi, lam)|0> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
    return u3(theta, phi, lam)[:, 0]


_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def two_qubit_state(theta_s, local0, local1):
    """Schmidt-form two-qubit state with local U3 angles ``(theta, phi, lam)``."""
    v = np.kron(ry(theta_s)[:, 0], np.array([1, 0]))
    v = _CX @ v
    return np.kron(u3(*local0), u3(*local1)) @ v


def _draw_angles(rng, count):
    theta = rng.uniform(0.0, math.pi, count)
    phi = rng.uniform(0.0, 2 * math.pi, count)
    lam = rng.uniform(0.0, 2 * math.pi, count)
    return np.stack([theta, phi, lam], axis=1)


def random_states(n_qubits, count, rng):
    """``count`` random states as rows of a ``(count, 2**n)`` array."""
    if n_qubits == 1:
        return np.array([u3_state(*a) for a in _draw_angles(rng, count)])
    if n_qubits == 2:
        theta_s = rng.uniform(0.0, math.pi, count)
        a0 = _draw_angles(rng, count)
        a1 = _draw_angles(rng, count)
        return np.array([two_qubit_state(t, x, y) for t, x, y in zip(theta_s, a0, a1)])
    raise ValidationError(f"state sampling supports 1 or 2 qubits, got {n_qubits}")


def sample_sets(n_qubits, n_train=100, n_val=100, seed=0):
    """Reproducible, independent training and validation state sets."""
    if n_train <= 0 or n_val <= 0:
        raise ValidationError("state set sizes must be positive")
    train_ss, val_ss = np.random.SeedSequence(seed).spawn(2)
    train = random_states(n_qubits, n_train, np.random.default_rng(train_ss))
    val = random_states(n_qubits, n_val, np.random.default_rng(val_ss))
    return StateSet(train, seed, "train"), StateSet(val, seed, "validation")
