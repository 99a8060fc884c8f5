"""Reference unitaries of the standard gate set (computational basis, q0 leftmost)."""

import numpy as np

from .errors import ValidationError

_S2 = 1 / np.sqrt(2)

REFERENCE = {
    "I": np.eye(2, dtype=np.complex128),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=np.complex128),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128),
    "S": np.diag([1, 1j]).astype(np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.diag([1, -1]).astype(np.complex128),
    # control on the lower-indexed qubit
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128),
    "CX_10": np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128),
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
}
for _m in REFERENCE.values():
    _m.flags.writeable = False

ALIASES = {"CX_01": "CX", "CNOT": "CX"}

STANDARD_1Q = ("H", "T", "S", "X", "Y", "Z")
STANDARD_2Q = ("CX", "CX_10", "CZ")


def canonical_name(name):
    name = ALIASES.get(name, name)
    if name not in REFERENCE:
        raise ValidationError(f"unknown gate {name!r}")
    return name


def reference_unitary(name):
    return REFERENCE[canonical_name(name)].copy()


def arity(name):
    return REFERENCE[canonical_name(name)].shape[0].bit_length() - 1


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def embed(U, qubits, n_qubits):
    """Full ``2^n`` matrix of ``U`` acting on ``qubits`` (in the listed order)."""
    U = np.asarray(U, dtype=np.complex128)
    k = len(qubits)
    if U.shape != (1 << k, 1 << k):
        raise ValidationError(f"{U.shape} matrix cannot act on {k} qubits")
    rest = [q for q in range(n_qubits) if q not in qubits]
    order = list(qubits) + rest
    full = np.kron(U, np.eye(1 << len(rest)))
    # full acts on qubits permuted as `order`; move axes back to 0..n-1
    t = full.reshape([2] * (2 * n_qubits))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n_qubits + i for i in inv])
    return t.reshape(1 << n_qubits, 1 << n_qubits)


def ideal_unitary(ops, n_qubits):
    """Ideal unitary of a gate list ``[(name, qubits), ...]``; control first for CX."""
    out = np.eye(1 << n_qubits, dtype=np.complex128)
    for name, qubits in ops:
        out = embed(reference_unitary(name), qubits, n_qubits) @ out
    return out
