"""Dense complex linear algebra used throughout the package.

Matrices and states are plain numpy arrays; the helpers here validate them and
provide the exact Hermitian exponentials the rest of the code relies on.
Qubit 0 is the leftmost tensor factor, so basis index ``b`` reads as the bit
string ``q0 q1 ... q{n-1}``.
"""

import numpy as np
import scipy.linalg

from .errors import ValidationError

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-10
MAX_DIM = 32

I2 = np.eye(2, dtype=np.complex128)
SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def as_matrix(a, name="matrix"):
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def check_hermitian(H, name="H"):
    H = as_matrix(H, name)
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > HERMITIAN_ATOL * scale:
        raise ValidationError(f"{name} is not Hermitian")
    return H


def is_unitary(U, atol=UNITARY_ATOL):
    U = np.asarray(U)
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= atol)


def _assert_unitary(U):
    # A failure here is a bug in the caller's generator, never corrected silently.
    if not is_unitary(U):
        raise ArithmeticError("propagator lost unitarity beyond 1e-10")
    return U


def expm_neg_i_Ht(H, t):
    """Return ``exp(-i H t)`` for Hermitian ``H`` via its eigendecomposition."""
    H = check_hermitian(H)
    t = float(t)
    if not np.isfinite(t):
        raise ValidationError("duration must be finite")
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(-1j * w * t)) @ V.conj().T
    return _assert_unitary(U)


def expm_with_derivative(H, dH, t):
    """Propagator ``U = exp(-i H t)`` and its derivative along ``dH``.

    The derivative is the upper-right block of the exponential of the
    block-triangular generator ``[[-iHt, -i dH t], [0, -iHt]]``.

    Returns
    -------
    (U, dU) : tuple of ndarray
    """
    H = check_hermitian(H, "H")
    dH = check_hermitian(dH, "dH")
    if H.shape != dH.shape:
        raise ValidationError(f"dimension mismatch: H {H.shape} vs dH {dH.shape}")
    t = float(t)
    if not np.isfinite(t):
        raise ValidationError("duration must be finite")
    d = H.shape[0]
    aug = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    aug[:d, :d] = -1j * t * H
    aug[d:, d:] = -1j * t * H
    aug[:d, d:] = -1j * t * dH
    dU = scipy.linalg.expm(aug)[:d, d:]
    return expm_neg_i_Ht(H, t), dU


def kron(*factors):
    """Tensor product of one or more matrices (or vectors), left to right."""
    if not factors:
        raise ValidationError("kron needs at least one factor")
    out = np.asarray(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=np.complex128))
    return out


def n_qubits_of(dim):
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


def as_state(v, n_qubits=None, atol=NORM_ATOL):
    """Validate and return ``v`` as a normalized complex state vector."""
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValidationError(f"state must be one-dimensional, got shape {v.shape}")
    n = n_qubits_of(v.shape[0])
    if n_qubits is not None and n != n_qubits:
        raise ValidationError(f"expected a {n_qubits}-qubit state, got {n} qubits")
    if not np.all(np.isfinite(v)):
        raise ValidationError("state has non-finite amplitudes")
    if abs(np.linalg.norm(v) - 1.0) > atol:
        raise ValidationError(f"state is not normalized (norm {np.linalg.norm(v):.3g})")
    return v


def basis_state(bits):
    """Computational basis state for a bit string such as ``"01"``."""
    if not bits or any(b not in "01" for b in bits):
        raise ValidationError(f"invalid bit string {bits!r}")
    v = np.zeros(1 << len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1.0
    return v


def apply(U, v):
    U = as_matrix(U, "U")
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] != U.shape[1]:
        raise ValidationError(f"cannot apply {U.shape} matrix to vector of shape {v.shape}")
    return U @ v


def inner(a, b):
    """``<a|b>``, conjugate-linear in ``a``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"inner product of mismatched shapes {a.shape} and {b.shape}")
    return complex(np.vdot(a, b))


def process_fidelity(U_ref, U):
    """``|tr(U_ref^dagger U)|^2 / d^2``; equals 1 iff equal up to global phase."""
    U_ref = as_matrix(U_ref, "U_ref")
    U = as_matrix(U, "U")
    if U_ref.shape != U.shape:
        raise ValidationError(f"dimension mismatch: {U_ref.shape} vs {U.shape}")
    d = U.shape[0]
    return float(abs(np.trace(U_ref.conj().T @ U)) ** 2 / d**2)


def phase_aligned_distance(U, U_ref):
    """``min_alpha max|U - e^{i alpha} U_ref|`` with alpha from the trace overlap."""
    tr = np.trace(U_ref.conj().T @ U)
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    return float(np.max(np.abs(U - phase * U_ref)))
