"""Layout of logical circuits onto a global pulse timeline.

Every logical gate occupies one fixed-length slot (6 pi, the common runtime of
all library ansatzes). Ops are placed greedily, in program order, into the
earliest slot where their qubits are free, all their predecessors on those
qubits have finished, and no neighbouring qubit is pulsed by another op. Qubits
without an op in a slot idle for the whole slot, which is a multiple of pi and
therefore acts as the identity up to a sign.
"""

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import ansatz, gates
from .ansatz import Fixed, Idle, OneQubit, Param, Slice
from .errors import SchemaError, StructuralError, ValidationError
from .library import GATE_RUNTIME, atomic_write_json
from .model import MAX_QUBITS, PulseSegment

SLOT = GATE_RUNTIME
TIME_TOL = 1e-9
SCHEDULE_FORMAT = "dqdcompile-schedule"
SCHEDULE_VERSION = 1


@dataclass(frozen=True)
class LogicalOp:
    """One logical gate. ``params`` makes it a dynamic (trainable) slot."""

    gate: str
    qubits: tuple
    params: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.params is not None:
            object.__setattr__(self, "params", tuple(float(p) for p in self.params))


@dataclass(frozen=True)
class CircuitIR:
    n_qubits: int
    ops: tuple

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValidationError(f"unsupported chain length {self.n_qubits}")
        for i, op in enumerate(self.ops):
            qs = op.qubits
            if not qs or len(set(qs)) != len(qs):
                raise ValidationError(f"op {i} ({op.gate}): invalid qubit list {qs}")
            if any(not 0 <= q < self.n_qubits for q in qs):
                raise ValidationError(f"op {i} ({op.gate}): qubit index out of range for n={self.n_qubits}")
            if len(qs) > 2:
                raise ValidationError(f"op {i} ({op.gate}): at most two qubits per op")
            if len(qs) == 2 and abs(qs[0] - qs[1]) != 1:
                raise ValidationError(f"op {i} ({op.gate}): two-qubit ops must act on nearest neighbours, got {qs}")


def circuit_to_json(ir):
    ops = []
    for op in ir.ops:
        entry = {"gate": op.gate, "qubits": list(op.qubits)}
        if op.params is not None:
            entry["params"] = list(op.params)
        ops.append(entry)
    return {"n_qubits": ir.n_qubits, "ops": ops}


def circuit_from_json(data):
    """Accept either ``{"n_qubits": n, "ops": [...]}`` or a bare op list."""
    try:
        if isinstance(data, list):
            raw, n = data, None
        else:
            raw, n = data["ops"], data.get("n_qubits")
        ops = [LogicalOp(str(e["gate"]), tuple(e["qubits"]), e.get("params")) for e in raw]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed circuit description: {exc}") from None
    if n is None:
        n = 1 + max((q for op in ops for q in op.qubits), default=0)
    return CircuitIR(int(n), ops)


def load_circuit(path):
    try:
        with open(path) as fh:
            return circuit_from_json(json.load(fh))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg})") from None


@dataclass(frozen=True)
class Placement:
    op: int
    gate: str
    qubits: tuple
    slot: int
    start: float
    end: float


@dataclass(frozen=True)
class Schedule:
    """Global piecewise-constant pulse timeline for an ``n``-qubit chain.

    ``bindings[s][q]`` is the global index of the dynamic parameter driving
    qubit ``q`` in segment ``s`` (``None`` for fixed or idle pulses). It is
    kept in memory only; the file format stores plain pulse strengths.
    """

    n_qubits: int
    segments: tuple
    placements: tuple = ()
    slot_size: float = SLOT
    bindings: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def makespan(self):
        return math.fsum(seg.duration for seg in self.segments)

    @property
    def n_slots(self):
        return 1 + max((p.slot for p in self.placements), default=-1)

    def segment_times(self):
        """Start time of every segment plus the final end time."""
        return np.concatenate([[0.0], np.cumsum([seg.duration for seg in self.segments])])

    def pulse_matrix(self):
        return np.array([seg.strengths for seg in self.segments]).reshape(len(self.segments), self.n_qubits)

    def idle_mask(self):
        return np.array([[p is None for p in seg.pulses] for seg in self.segments],
                        dtype=bool).reshape(len(self.segments), self.n_qubits)


# ---------------------------------------------------------------------------
# scheduling


@dataclass
class _Resolved:
    index: int
    label: str
    qubits: tuple
    spec: ansatz.AnsatzSpec
    params: np.ndarray
    offset: int | None  # first global dynamic parameter, None for library gates


def _resolve(i, op, lib, offset):
    qubits = op.qubits
    if op.params is not None:
        if len(qubits) != 1:
            raise StructuralError(f"op {i} ({op.gate}): dynamic slots are single-qubit only")
        spec = ansatz.single_qubit_ansatz(len(op.params))
        params = ansatz.check_params(spec, np.array(op.params))
        label = op.gate
    else:
        name = gates.ALIASES.get(op.gate, op.gate)
        if len(qubits) == 2 and qubits[0] > qubits[1]:
            qubits = qubits[::-1]
            if name == "CX":
                name = "CX_10"
            elif name == "CX_10":
                name = "CX"
            elif name != "CZ":
                raise StructuralError(f"op {i} ({op.gate}): cannot reverse orientation of {name}")
        if lib is None or name not in lib:
            raise ValidationError(f"op {i}: gate {name!r} is missing from the library")
        g = lib[name]
        spec, params, label, offset = g.spec, g.params, name, None
    if spec.n_qubits != len(qubits):
        raise StructuralError(f"op {i} ({label}): ansatz acts on {spec.n_qubits} qubits, op on {len(qubits)}")
    if abs(spec.total_duration - SLOT) > TIME_TOL:
        raise StructuralError(f"op {i} ({label}): runtime {spec.total_duration / math.pi:g} pi differs from the 6 pi slot")
    return _Resolved(i, label, qubits, spec, params, offset)


def _neighbourhood(qubits, n):
    out = set(qubits)
    for q in qubits:
        out.update(x for x in (q - 1, q + 1) if 0 <= x < n)
    return out


def place(ir, slot_size=SLOT):
    """Greedy slot assignment. Returns the slot index of every op."""
    ready = [0] * ir.n_qubits
    busy = defaultdict(set)
    slots = []
    for op in ir.ops:
        s = max(ready[q] for q in op.qubits)
        blocked = _neighbourhood(op.qubits, ir.n_qubits)
        while busy[s] & blocked:
            s += 1
        busy[s].update(op.qubits)
        for q in op.qubits:
            ready[q] = s + 1
        slots.append(s)
    return slots


def _merge_times(times):
    out = []
    for t in sorted(times):
        if not out or t - out[-1] > TIME_TOL:
            out.append(t)
    return out


def _slot_segments(n_qubits, resolved, slot_size):
    local = []
    cuts = {0.0, slot_size}
    for r in resolved:
        ends = np.cumsum([sl.dt for sl in r.spec.slices])
        ends[-1] = slot_size
        cuts.update(ends.tolist())
        lay = r.spec.layout
        J = ansatz.pulse_matrix(r.spec, r.params)
        pidx = np.full(J.shape, -1, dtype=np.int64)
        pidx[lay.term_slice, lay.term_qubit] = lay.term_param
        local.append((r, ends, J, pidx, lay.pulsed))
    bounds = _merge_times(cuts)
    segs, binds = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (a + b)
        pulses = [None] * n_qubits
        bind = [None] * n_qubits
        for r, ends, J, pidx, pulsed in local:
            s = int(np.searchsorted(ends, mid))
            for k, q in enumerate(r.qubits):
                if pulsed[s, k]:
                    pulses[q] = float(J[s, k])
                    if r.offset is not None and pidx[s, k] >= 0:
                        bind[q] = r.offset + int(pidx[s, k])
        segs.append(PulseSegment(b - a, tuple(pulses)))
        binds.append(tuple(bind))
    return segs, binds


def schedule(ir, lib, slot_size=SLOT):
    """Lay ``ir`` out as a global pulse schedule using gates from ``lib``."""
    resolved = []
    offset = 0
    for i, op in enumerate(ir.ops):
        r = _resolve(i, op, lib, offset if op.params is not None else None)
        if r.offset is not None:
            offset += r.spec.n_params
        resolved.append(r)
    slots = place(ir, slot_size)
    by_slot = defaultdict(list)
    for r, s in zip(resolved, slots):
        by_slot[s].append(r)
    n_slots = 1 + max(slots, default=-1)
    segments, bindings, placements = [], [], []
    for s in range(n_slots):
        start = s * slot_size
        members = sorted(by_slot[s], key=lambda r: min(r.qubits))
        segs, binds = _slot_segments(ir.n_qubits, members, slot_size)
        segments += segs
        bindings += binds
        for r in members:
            placements.append(Placement(r.index, r.label, r.qubits, s, start, start + slot_size))
    placements.sort(key=lambda p: p.op)
    return Schedule(ir.n_qubits, tuple(segments), tuple(placements), slot_size, tuple(bindings))


def dynamic_parameters(ir):
    """Concatenated inline parameters of all dynamic ops, in program order."""
    vals = [p for op in ir.ops if op.params is not None for p in op.params]
    return np.array(vals, dtype=np.float64)


def schedule_ansatz(s):
    """Parametric view of a schedule: dynamic pulses become trainable params.

    Returns ``(spec, params)`` where ``spec`` reproduces the schedule exactly
    and ``params`` holds the current dynamic pulse strengths.
    """
    if s.bindings is None:
        raise ValidationError("schedule carries no dynamic-parameter bindings")
    slices = []
    values = {}
    for seg, bind in zip(s.segments, s.bindings):
        slots = []
        for q, (J, k) in enumerate(zip(seg.pulses, bind)):
            if J is None:
                slots.append(Idle(q))
            elif k is not None:
                slots.append(OneQubit(q, Param(k)))
                values[k] = J
            else:
                slots.append(OneQubit(q, Fixed(J)))
        slices.append(Slice(seg.duration, tuple(slots)))
    spec = ansatz.AnsatzSpec(s.n_qubits, slices, name="schedule")
    return spec, np.array([values[k] for k in range(len(values))])


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    checks: dict  # name -> list of violation messages

    @property
    def ok(self):
        return not any(self.checks.values())

    def summary(self):
        return {name: ("pass" if not v else f"fail ({len(v)})") for name, v in self.checks.items()}

    def to_dict(self):
        return {"ok": self.ok, "checks": {k: {"passed": not v, "violations": v} for k, v in self.checks.items()}}


def _is_multiple(x, unit):
    k = x / unit
    return abs(k - round(k)) <= TIME_TOL * max(1.0, abs(k))


def verify_schedule(s):
    """Itemised constraint audit of a schedule; never raises."""
    checks = {"non_negative": [], "durations": [], "adjacency": [], "idle_pi_multiple": [],
              "placement_coverage": [], "slot_alignment": []}
    times = s.segment_times()
    for j, seg in enumerate(s.segments):
        if len(seg.pulses) != s.n_qubits:
            checks["durations"].append(f"segment {j}: {len(seg.pulses)} pulses for {s.n_qubits} qubits")
            continue
        if not seg.duration > 0:
            checks["durations"].append(f"segment {j}: non-positive duration {seg.duration}")
        for q, J in enumerate(seg.pulses):
            if J is not None and not (math.isfinite(J) and J >= 0):
                checks["non_negative"].append(f"segment {j} qubit {q}: J={J}")

    def covering(a, b, qubits):
        return [p for p in s.placements
                if set(qubits) <= set(p.qubits) and p.start - TIME_TOL <= a and b <= p.end + TIME_TOL]

    for j, seg in enumerate(s.segments):
        if len(seg.pulses) != s.n_qubits:
            continue
        a, b = times[j], times[j + 1]
        pulsed = [J is not None for J in seg.pulses]
        for q in range(s.n_qubits):
            if pulsed[q] and not covering(a, b, (q,)):
                checks["placement_coverage"].append(f"segment {j}: qubit {q} pulsed outside any placement")
        for q in range(s.n_qubits - 1):
            if pulsed[q] and pulsed[q + 1] and not covering(a, b, (q, q + 1)):
                checks["adjacency"].append(
                    f"segment {j} [{a / math.pi:.4g}pi, {b / math.pi:.4g}pi): qubits {q},{q + 1} pulsed together")

    for q in range(s.n_qubits):
        run = 0.0
        run_start = 0.0
        for j, seg in enumerate(s.segments):
            if len(seg.pulses) != s.n_qubits:
                break
            if seg.pulses[q] is None:
                if run == 0.0:
                    run_start = times[j]
                run += seg.duration
                continue
            if run and not _is_multiple(run, math.pi):
                checks["idle_pi_multiple"].append(
                    f"qubit {q}: idle span of {run / math.pi:.6g} pi from t={run_start / math.pi:.4g} pi")
            run = 0.0
        if run and not _is_multiple(run, math.pi):
            checks["idle_pi_multiple"].append(
                f"qubit {q}: idle span of {run / math.pi:.6g} pi from t={run_start / math.pi:.4g} pi")

    seen = defaultdict(list)
    for p in s.placements:
        if not _is_multiple(p.start, s.slot_size) or abs(p.end - p.start - s.slot_size) > TIME_TOL:
            checks["slot_alignment"].append(f"op {p.op}: [{p.start}, {p.end}) not aligned to the slot grid")
        if p.end > s.makespan + TIME_TOL:
            checks["slot_alignment"].append(f"op {p.op}: ends after the schedule")
        for q in p.qubits:
            seen[q].append((p.start, p.end, p.op))
    for q, spans in seen.items():
        spans.sort()
        for (a0, a1, i), (b0, b1, k) in zip(spans, spans[1:]):
            if b0 < a1 - TIME_TOL:
                checks["slot_alignment"].append(f"qubit {q}: ops {i} and {k} overlap")
    unit = s.slot_size if s.placements else math.pi
    if s.segments and not _is_multiple(s.makespan, unit):
        checks["slot_alignment"].append(f"makespan {s.makespan / math.pi:.6g} pi is not a multiple of the slot grid")
    return VerifyReport(checks)


# ---------------------------------------------------------------------------
# files


def schedule_to_dict(s):
    return {
        "format": SCHEDULE_FORMAT,
        "version": SCHEDULE_VERSION,
        "n_qubits": s.n_qubits,
        "makespan": s.makespan,
        "slot_size": s.slot_size,
        "segments": [{"duration": seg.duration,
                      "pulses": [None if J is None else {"J": J} for J in seg.pulses]}
                     for seg in s.segments],
        "placements": [{"op": p.op, "gate": p.gate, "qubits": list(p.qubits), "slot": p.slot,
                        "start": p.start, "end": p.end} for p in s.placements],
    }


def schedule_from_dict(d):
    try:
        if d.get("format", SCHEDULE_FORMAT) != SCHEDULE_FORMAT:
            raise SchemaError(f"not a schedule file (format {d.get('format')!r})")
        if d.get("version", SCHEDULE_VERSION) != SCHEDULE_VERSION:
            raise SchemaError(f"unsupported schedule version {d['version']}")
        n = int(d["n_qubits"])
        segs = tuple(PulseSegment(float(e["duration"]),
                                  tuple(None if p is None else float(p["J"]) for p in e["pulses"]))
                     for e in d["segments"])
        places = tuple(Placement(int(p["op"]), str(p["gate"]), tuple(int(q) for q in p["qubits"]),
                                 int(p["slot"]), float(p["start"]), float(p["end"]))
                       for p in d.get("placements", []))
        s = Schedule(n, segs, places, float(d.get("slot_size", SLOT)))
    except KeyError as exc:
        raise SchemaError(f"malformed schedule: missing field {exc.args[0]!r}") from None
    except ValidationError as exc:
        raise SchemaError(f"invalid schedule content: {exc}") from None
    except (TypeError, AttributeError, ValueError) as exc:
        raise SchemaError(f"malformed schedule: {exc}") from None
    if "makespan" in d and abs(float(d["makespan"]) - s.makespan) > TIME_TOL * max(1.0, s.makespan):
        raise SchemaError("schedule header makespan does not match its segments")
    return s


def save_schedule(s, path):
    atomic_write_json(schedule_to_dict(s), path)


def load_schedule(path):
    try:
        with open(path) as fh:
            return schedule_from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg})") from None
