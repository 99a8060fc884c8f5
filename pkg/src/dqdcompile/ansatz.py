"""Fixed-structure parametric native-gate sequences (ansatzes).

An :class:`AnsatzSpec` is a list of time slices. Each slice has one duration
and a set of slots that together cover every qubit exactly once: a pulsed
single qubit, a pulsed adjacent pair, or an idle qubit. Pulse strengths are
either fixed numbers or references into a shared non-negative parameter vector.
Slices where adjacent qubits are both pulsed evolve under the coupled chain
Hamiltonian, so the coupling term is always simulated.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, model
from .errors import ConstraintViolation, StructuralError, ValidationError

PI_TOL = 1e-9


@dataclass(frozen=True)
class Param:
    index: int


@dataclass(frozen=True)
class Fixed:
    value: float


@dataclass(frozen=True)
class OneQubit:
    qubit: int
    binding: Param | Fixed

    @property
    def qubits(self):
        return (self.qubit,)

    @property
    def bindings(self):
        return (self.binding,)


@dataclass(frozen=True)
class TwoQubit:
    """Simultaneous pulse pair on adjacent qubits; one strength is fixed."""

    qubits: tuple
    bindings: tuple

    def __post_init__(self):
        a, b = self.qubits
        if b != a + 1:
            raise StructuralError(f"two-qubit slot must act on adjacent qubits, got {self.qubits}")
        kinds = sorted(type(x).__name__ for x in self.bindings)
        if kinds != ["Fixed", "Param"]:
            raise StructuralError("two-qubit slot needs exactly one Fixed and one Param binding")


@dataclass(frozen=True)
class Idle:
    qubit: int

    @property
    def qubits(self):
        return (self.qubit,)

    @property
    def bindings(self):
        return (None,)


@dataclass(frozen=True)
class Slice:
    dt: float
    slots: tuple


@dataclass(frozen=True)
class _Layout:
    dt: np.ndarray
    fixed: np.ndarray  # (S, n) fixed pulse strengths, 0 elsewhere
    term_slice: np.ndarray
    term_qubit: np.ndarray
    term_param: np.ndarray
    term_start: np.ndarray
    pulsed: np.ndarray  # (S, n) bool, False for idle qubits


def is_pi_multiple(duration, tol=PI_TOL):
    k = duration / math.pi
    return abs(k - round(k)) <= tol * max(1.0, abs(k)) and round(k) >= 0


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    slices: tuple
    name: str = ""
    _layout: _Layout = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        if not 1 <= self.n_qubits <= model.MAX_QUBITS:
            raise ValidationError(f"unsupported qubit count {self.n_qubits}")
        if not self.slices:
            raise StructuralError("an ansatz needs at least one slice")
        seen = []
        for i, sl in enumerate(self.slices):
            if not (math.isfinite(sl.dt) and sl.dt > 0):
                raise StructuralError(f"slice {i}: duration must be positive")
            covered = sorted(q for slot in sl.slots for q in slot.qubits)
            if covered != list(range(self.n_qubits)):
                raise StructuralError(f"slice {i}: slots cover qubits {covered}, expected each of 0..{self.n_qubits - 1} once")
            for slot in sl.slots:
                for b in slot.bindings:
                    if isinstance(b, Param):
                        seen.append(b.index)
                    elif isinstance(b, Fixed) and not b.value >= 0:
                        raise ConstraintViolation(f"slice {i}: fixed pulse {b.value} is negative")
        if sorted(seen) != list(range(len(seen))):
            raise StructuralError("parameter indices must be dense 0..P-1, each used once")
        if not is_pi_multiple(self.total_duration):
            raise StructuralError(
                f"total duration {self.total_duration / math.pi:.6g} pi is not an integer multiple of pi")

    @property
    def total_duration(self):
        return math.fsum(sl.dt for sl in self.slices)

    @property
    def n_params(self):
        return sum(isinstance(b, Param) for sl in self.slices for slot in sl.slots for b in slot.bindings)

    @property
    def layout(self):
        if self._layout is None:
            object.__setattr__(self, "_layout", self._build_layout())
        return self._layout

    def _build_layout(self):
        n_s = len(self.slices)
        fixed = np.zeros((n_s, self.n_qubits))
        pulsed = np.zeros((n_s, self.n_qubits), dtype=bool)
        ts, tq, tp = [], [], []
        for s, sl in enumerate(self.slices):
            for slot in sl.slots:
                for q, b in zip(slot.qubits, slot.bindings):
                    if b is None:
                        continue
                    pulsed[s, q] = True
                    if isinstance(b, Fixed):
                        fixed[s, q] = b.value
                    else:
                        ts.append(s)
                        tq.append(q)
                        tp.append(b.index)
        term_slice = np.array(ts, dtype=np.int64)
        term_start = np.searchsorted(term_slice, np.arange(n_s + 1)).astype(np.int64)
        return _Layout(
            dt=np.array([sl.dt for sl in self.slices]),
            fixed=fixed,
            term_slice=term_slice,
            term_qubit=np.array(tq, dtype=np.int64),
            term_param=np.array(tp, dtype=np.int64),
            term_start=term_start,
            pulsed=pulsed,
        )


def check_params(spec, params):
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (spec.n_params,):
        raise ValidationError(f"expected {spec.n_params} parameters, got shape {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ValidationError("parameters must be finite")
    if np.any(params < 0):
        raise ConstraintViolation(f"negative pulse strength at index {int(np.argmin(params))}")
    return params


def pulse_matrix(spec, params):
    """Per-slice, per-qubit pulse strengths, shape ``(S, n)``."""
    lay = spec.layout
    J = lay.fixed.copy()
    J[lay.term_slice, lay.term_qubit] = params[lay.term_param]
    return J


@dataclass(frozen=True)
class Propagation:
    """Slice propagators at one parameter point plus what derivatives need."""

    J: np.ndarray
    U: np.ndarray
    W: np.ndarray
    V: np.ndarray

    def derivatives(self, spec):
        lay = spec.layout
        dh = model.derivative_diagonals(self.J, lay.term_slice, lay.term_qubit)
        return kernels.derivatives(self.W, self.V, lay.dt, lay.term_start, dh)


def propagate(spec, params):
    params = check_params(spec, params)
    J = pulse_matrix(spec, params)
    _, _, xsum = model.chain_operators(spec.n_qubits)
    U, W, V = kernels.propagators(model.hamiltonian_diagonals(J), xsum, spec.layout.dt)
    return Propagation(J, U, W, V)


def slice_propagators(spec, params, derivatives=False):
    """Slice propagators ``U`` (and ``dU`` per derivative term if requested)."""
    prop = propagate(spec, params)
    return prop.U, (prop.derivatives(spec) if derivatives else None)


def evaluate(spec, params):
    """Unitary realised by the ansatz at ``params``."""
    U, _ = slice_propagators(spec, params)
    return kernels.chain_product(U)


def evaluate_with_jacobian(spec, params, psi):
    """Output state for input ``psi`` and its derivative per parameter.

    One cached forward sweep, one backward sweep. Returns ``(out, jac)`` with
    ``jac[k] = d out / d params[k]``.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (1 << spec.n_qubits,):
        raise ValidationError(f"input state of shape {psi.shape} does not match {spec.n_qubits} qubits")
    U, dU = slice_propagators(spec, params, derivatives=True)
    lay = spec.layout
    return kernels.state_jacobian(U, dU, lay.term_start, lay.term_param, spec.n_params, psi)


# ---------------------------------------------------------------------------
# templates


def single_qubit_ansatz(n_gates=12, dt=math.pi / 2):
    """``n_gates`` consecutive native gates of duration ``dt`` on one qubit."""
    if n_gates < 1:
        raise StructuralError("need at least one native gate")
    slices = [Slice(dt, (OneQubit(0, Param(k)),)) for k in range(n_gates)]
    return AnsatzSpec(1, slices, name=f"1q-{n_gates}x{dt / math.pi:g}pi")


def _individual_operations(first_index, n_slices=20, dt=math.pi / 10):
    slices = []
    k = first_index
    for _ in range(n_slices):
        slices.append(Slice(dt, (OneQubit(0, Param(k)), OneQubit(1, Param(k + 1)))))
        k += 2
    return slices, k


def two_qubit_ansatz():
    """IO / EG / IO two-qubit template with a 6 pi runtime and 84 parameters.

    Individual operations: 20 slices of pi/10 with both qubits independently
    pulsed. Entanglement generation: 4 pulse pairs of pi/2; the first two fix
    q0 at 1 and vary q1, the last two fix q1 at 1 and vary q0.
    """
    io1, k = _individual_operations(0)
    eg = []
    for j in range(4):
        if j < 2:
            bindings = (Fixed(1.0), Param(k))
        else:
            bindings = (Param(k), Fixed(1.0))
        eg.append(Slice(math.pi / 2, (TwoQubit((0, 1), bindings),)))
        k += 1
    io2, k = _individual_operations(k)
    return AnsatzSpec(2, io1 + eg + io2, name="2q-io-eg-io")


def append_idle(spec, duration):
    """``spec`` followed by an all-idle slice; parameters are unchanged."""
    idle = Slice(duration, tuple(Idle(q) for q in range(spec.n_qubits)))
    return AnsatzSpec(spec.n_qubits, spec.slices + (idle,), name=spec.name)


# ---------------------------------------------------------------------------
# serialisation


def _binding_to_dict(b):
    if isinstance(b, Param):
        return {"param": b.index}
    return {"fixed": b.value}


def _binding_from_dict(d):
    if "param" in d:
        return Param(int(d["param"]))
    return Fixed(float(d["fixed"]))


def spec_to_dict(spec):
    slots = []
    for sl in spec.slices:
        entry = []
        for slot in sl.slots:
            if isinstance(slot, Idle):
                entry.append({"kind": "idle", "qubits": [slot.qubit]})
            elif isinstance(slot, OneQubit):
                entry.append({"kind": "one", "qubits": [slot.qubit], "bindings": [_binding_to_dict(slot.binding)]})
            else:
                entry.append({"kind": "two", "qubits": list(slot.qubits),
                              "bindings": [_binding_to_dict(b) for b in slot.bindings]})
        slots.append({"dt": sl.dt, "slots": entry})
    return {"name": spec.name, "n_qubits": spec.n_qubits, "slices": slots}


def spec_from_dict(d):
    slices = []
    for sl in d["slices"]:
        slots = []
        for s in sl["slots"]:
            kind = s["kind"]
            if kind == "idle":
                slots.append(Idle(int(s["qubits"][0])))
            elif kind == "one":
                slots.append(OneQubit(int(s["qubits"][0]), _binding_from_dict(s["bindings"][0])))
            elif kind == "two":
                slots.append(TwoQubit(tuple(int(q) for q in s["qubits"]),
                                      tuple(_binding_from_dict(b) for b in s["bindings"])))
            else:
                raise ValidationError(f"unknown slot kind {kind!r}")
        slices.append(Slice(float(sl["dt"]), tuple(slots)))
    return AnsatzSpec(int(d["n_qubits"]), slices, name=d.get("name", ""))
