"""Singlet-triplet double-quantum-dot chain model.

Units: h = hbar = 1. A pulsed qubit ``q`` contributes ``J_q sigma_z + sigma_x``;
neighbours ``q, q+1`` couple through ``(J_q J_{q+1} / 4) (sz - I)(sz - I)``,
i.e. ``J12 / 2`` with ``J12 = J_q J_{q+1} / 2``. No overall ``hbar/2`` factor is
applied, so a two-qubit Hamiltonian with one pulse switched off reduces to the
single-qubit one.
"""

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .errors import CapacityError, ConstraintViolation, ValidationError

MAX_QUBITS = 5


@dataclass(frozen=True)
class ChainSpec:
    """Linear nearest-neighbour chain with unit x-rotation rate.

    ``j_max`` is an optional soft bound: exceeding it warns, never raises.
    """

    n_qubits: int
    j_max: float | None = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("a chain needs at least one qubit")
        if self.n_qubits > MAX_QUBITS:
            raise CapacityError(f"chain of {self.n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")

    @property
    def dim(self):
        return 1 << self.n_qubits


@dataclass(frozen=True)
class PulseSegment:
    """Constant-pulse time slice. ``pulses[q] is None`` marks qubit ``q`` idle."""

    duration: float
    pulses: tuple

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(None if p is None else float(p) for p in self.pulses))
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValidationError(f"segment duration must be positive, got {self.duration}")
        for q, p in enumerate(self.pulses):
            if p is not None:
                check_pulse(p, label=f"qubit {q}")

    @property
    def strengths(self):
        return np.array([0.0 if p is None else p for p in self.pulses])


def check_pulse(J, j_max=None, label="pulse"):
    J = float(J)
    if not math.isfinite(J):
        raise ValidationError(f"{label}: pulse strength must be finite")
    if J < 0:
        raise ConstraintViolation(f"{label}: pulse strength {J} is negative")
    if j_max is not None and J > j_max:
        warnings.warn(f"{label}: pulse strength {J:.4g} exceeds J_max={j_max:.4g}", stacklevel=3)
    return J


def h1q(J):
    """Single-qubit Hamiltonian ``J sigma_z + sigma_x``."""
    J = check_pulse(J)
    return J * linalg.SZ + linalg.SX


def native_1q(J, dt):
    """Native gate ``exp(-i (J sigma_z + sigma_x) dt)``."""
    if not dt > 0:
        raise ValidationError(f"native gate duration must be positive, got {dt}")
    return linalg.expm_neg_i_Ht(h1q(J), dt)


def h2q(J1, J2):
    """Two-adjacent-qubit Hamiltonian on the ``|q0 q1>`` basis."""
    J1 = check_pulse(J1, label="J1")
    J2 = check_pulse(J2, label="J2")
    I, X, Z = linalg.I2, linalg.SX, linalg.SZ
    J12 = J1 * J2 / 2
    return (J1 * np.kron(Z, I) + J2 * np.kron(I, Z) + np.kron(X, I) + np.kron(I, X)
            + (J12 / 2) * np.kron(Z - I, Z - I))


@lru_cache(maxsize=None)
def chain_operators(n_qubits):
    """Diagonal building blocks of an ``n``-qubit chain Hamiltonian.

    Returns ``(zdiag, ndiag, xsum)``: ``zdiag[q]`` is the diagonal of
    ``sigma_z`` on qubit ``q``, ``ndiag[q]`` that of ``sigma_z - I`` and
    ``xsum`` the dense ``sum_q sigma_x^q``.
    """
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"chain of {n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")
    d = 1 << n_qubits
    idx = np.arange(d)
    bits = np.array([(idx >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)])
    zdiag = 1.0 - 2.0 * bits
    ndiag = -2.0 * bits
    xsum = np.zeros((d, d))
    for q in range(n_qubits):
        flip = idx ^ (1 << (n_qubits - 1 - q))
        xsum[idx, flip] = 1.0
    for arr in (zdiag, ndiag, xsum):
        arr.flags.writeable = False
    return zdiag, ndiag, xsum


def hamiltonian_diagonals(J):
    """Diagonal part of the chain Hamiltonian for each row of ``J`` (shape ``(S, n)``)."""
    J = np.atleast_2d(np.asarray(J, dtype=np.float64))
    zdiag, ndiag, _ = chain_operators(J.shape[1])
    coupling = J[:, :-1] * J[:, 1:] / 4.0
    pair = ndiag[:-1] * ndiag[1:]
    return J @ zdiag + coupling @ pair


def derivative_diagonals(J, slices, qubits):
    """Diagonal of ``dH/dJ_q`` in slice ``s`` for each ``(s, q)`` pair.

    ``dH/dJ_q = sigma_z^q + sum_{m = q +- 1} (J_m / 4)(sz - I)^q (sz - I)^m``.
    """
    J = np.atleast_2d(np.asarray(J, dtype=np.float64))
    n = J.shape[1]
    zdiag, ndiag, _ = chain_operators(n)
    slices = np.asarray(slices, dtype=np.int64)
    qubits = np.asarray(qubits, dtype=np.int64)
    out = zdiag[qubits].copy()
    for step in (-1, 1):
        nb = qubits + step
        ok = (nb >= 0) & (nb < n)
        if np.any(ok):
            jn = J[slices[ok], nb[ok]] / 4.0
            out[ok] += jn[:, None] * ndiag[qubits[ok]] * ndiag[nb[ok]]
    return out


def chain_hamiltonian(J, spec=None):
    """Dense Hamiltonian of the chain for pulse vector ``J``."""
    J = np.asarray(J, dtype=np.float64).ravel()
    n = len(J)
    if spec is not None and spec.n_qubits != n:
        raise ValidationError(f"pulse vector has {n} entries for a {spec.n_qubits}-qubit chain")
    if n == 0:
        raise ValidationError("empty pulse vector")
    if n > MAX_QUBITS:
        raise CapacityError(f"chain of {n} qubits exceeds the {MAX_QUBITS}-qubit limit")
    j_max = None if spec is None else spec.j_max
    for q, value in enumerate(J):
        check_pulse(value, j_max, label=f"qubit {q}")
    _, _, xsum = chain_operators(n)
    return xsum + np.diag(hamiltonian_diagonals(J[None, :])[0])


def segment_propagator(seg, spec):
    """``exp(-i H(seg) duration)`` for one pulse segment."""
    if len(seg.pulses) != spec.n_qubits:
        raise ValidationError(f"segment has {len(seg.pulses)} pulses for a {spec.n_qubits}-qubit chain")
    return linalg.expm_neg_i_Ht(chain_hamiltonian(seg.strengths, spec), seg.duration)
