"""Compiled standard gates and their on-disk library format."""

import hashlib
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import ansatz, gates, linalg, trainer
from .errors import CompilationFailed, SchemaError, ValidationError

log = logging.getLogger(__name__)

FORMAT = "dqdcompile-gate-library"
VERSION = 1
GATE_RUNTIME = 6 * math.pi

# Standard learning rates. Two-qubit runs average the gradient over 4 training
# states per round; single-state rounds at lr 0.1 stall around 1e-4.
DEFAULTS = {
    **{name: {"learning_rate": 0.05, "max_rounds": 4000, "batch_size": 1} for name in gates.STANDARD_1Q},
    "CX": {"learning_rate": 0.1, "max_rounds": 8000, "batch_size": 4},
    "CX_10": {"learning_rate": 0.1, "max_rounds": 8000, "batch_size": 4},
    "CZ": {"learning_rate": 0.02, "max_rounds": 8000, "batch_size": 4},
}


@dataclass(frozen=True)
class CompiledGate:
    name: str
    arity: int
    spec: ansatz.AnsatzSpec
    params: np.ndarray
    epsilon: float
    meta: dict = field(default_factory=dict)

    def unitary(self):
        return ansatz.evaluate(self.spec, self.params)

    def __eq__(self, other):
        if not isinstance(other, CompiledGate):
            return NotImplemented
        return (self.name == other.name and self.arity == other.arity and self.spec == other.spec
                and np.array_equal(self.params, other.params) and self.epsilon == other.epsilon
                and self.meta == other.meta)

    __hash__ = None


@dataclass
class GateLibrary:
    gates: dict = field(default_factory=dict)
    version: int = VERSION

    def __contains__(self, name):
        return name in self.gates

    def __getitem__(self, name):
        try:
            return self.gates[name]
        except KeyError:
            raise KeyError(f"gate {name!r} is not in the library") from None

    def __len__(self):
        return len(self.gates)

    def names(self):
        return sorted(self.gates)

    def add(self, gate):
        if gate.name in self.gates:
            raise ValidationError(f"gate {gate.name!r} already in library")
        self.gates[gate.name] = gate


def standard_spec(name):
    return ansatz.single_qubit_ansatz(12, math.pi / 2) if gates.arity(name) == 1 else ansatz.two_qubit_ansatz()


def gate_fidelity(g, U_ref):
    """Phase-invariant ``|tr(U_ref^dagger A)|^2 / d^2`` of a compiled gate."""
    return linalg.process_fidelity(U_ref, g.unitary())


def compile_standard(name, seed=0, sampler_seed=None, **overrides):
    """Train the standard ansatz for gate ``name`` and return the admitted gate.

    ``overrides`` replace :class:`~dqdcompile.trainer.TrainConfig` fields.
    Raises :class:`CompilationFailed` (carrying the report) if the validation
    error does not reach the threshold.
    """
    name = gates.canonical_name(name)
    if name not in DEFAULTS:
        raise ValidationError(f"{name!r} is not a standard library gate")
    cfg = trainer.TrainConfig(**{**DEFAULTS[name], "seed": seed, **overrides})
    sampler_seed = seed if sampler_seed is None else sampler_seed
    spec = standard_spec(name)
    U_ref = gates.reference_unitary(name)
    report = trainer.train(U_ref, spec, cfg, sampler_seed)
    if not report.converged:
        raise CompilationFailed(
            f"{name}: eps={report.final_error:.3g} after {report.rounds_used} rounds at lr={cfg.learning_rate}"
            " (try another learning rate)", report)
    gate = CompiledGate(
        name=name,
        arity=gates.arity(name),
        spec=spec,
        params=report.params,
        epsilon=report.final_error,
        meta={"learning_rate": cfg.learning_rate, "rounds": report.rounds_used, "seed": seed,
              "sampler_seed": sampler_seed, "threshold": cfg.error_threshold, "batch_size": cfg.batch_size},
    )
    fid = gate_fidelity(gate, U_ref)
    if fid < 1 - 2 * gate.epsilon:
        raise CompilationFailed(f"{name}: operator fidelity {fid:.8f} inconsistent with eps={gate.epsilon:.3g}", report)
    return gate


def build_library(names=gates.STANDARD_1Q + gates.STANDARD_2Q, seed=0, **overrides):
    lib = GateLibrary()
    for name in names:
        g = compile_standard(name, seed=seed, **overrides)
        log.info("compiled %s: eps=%.3g in %d rounds", name, g.epsilon, g.meta["rounds"])
        lib.add(g)
    return lib


# ---------------------------------------------------------------------------
# persistence

_BINDING = {"type": "object", "oneOf": [
    {"required": ["param"], "properties": {"param": {"type": "integer", "minimum": 0}}},
    {"required": ["fixed"], "properties": {"fixed": {"type": "number", "minimum": 0}}},
]}

GATE_SCHEMA = {
    "type": "object",
    "required": ["name", "arity", "ansatz", "params", "epsilon", "meta"],
    "properties": {
        "name": {"type": "string"},
        "arity": {"enum": [1, 2]},
        "params": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "epsilon": {"type": "number", "minimum": 0},
        "meta": {"type": "object"},
        "ansatz": {
            "type": "object",
            "required": ["n_qubits", "slices"],
            "properties": {
                "name": {"type": "string"},
                "n_qubits": {"type": "integer", "minimum": 1},
                "slices": {"type": "array", "minItems": 1, "items": {
                    "type": "object",
                    "required": ["dt", "slots"],
                    "properties": {
                        "dt": {"type": "number", "exclusiveMinimum": 0},
                        "slots": {"type": "array", "items": {
                            "type": "object",
                            "required": ["kind", "qubits"],
                            "properties": {
                                "kind": {"enum": ["one", "two", "idle"]},
                                "qubits": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                "bindings": {"type": "array", "items": _BINDING},
                            },
                        }},
                    },
                }},
            },
        },
    },
}

LIBRARY_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "checksum", "gates"],
    "properties": {
        "format": {"const": FORMAT},
        "version": {"type": "integer"},
        "checksum": {"type": "string"},
        "gates": {"type": "object", "additionalProperties": GATE_SCHEMA},
    },
}


def gate_to_dict(g):
    return {
        "name": g.name,
        "arity": g.arity,
        "ansatz": ansatz.spec_to_dict(g.spec),
        "params": [float(x) for x in g.params],
        "epsilon": float(g.epsilon),
        "meta": dict(g.meta),
    }


def gate_from_dict(d):
    spec = ansatz.spec_from_dict(d["ansatz"])
    params = ansatz.check_params(spec, np.asarray(d["params"], dtype=np.float64))
    return CompiledGate(d["name"], int(d["arity"]), spec, params, float(d["epsilon"]), dict(d["meta"]))


def _checksum(gates_dict):
    blob = json.dumps(gates_dict, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


def library_to_dict(lib):
    body = {name: gate_to_dict(g) for name, g in sorted(lib.gates.items())}
    return {"format": FORMAT, "version": lib.version, "checksum": _checksum(body), "gates": body}


def library_from_dict(d):
    try:
        jsonschema.validate(d, LIBRARY_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"gate library schema violation: {exc.message}") from None
    if d["version"] != VERSION:
        raise SchemaError(f"unsupported gate library version {d['version']} (expected {VERSION})")
    if _checksum(d["gates"]) != d["checksum"]:
        raise SchemaError("gate library checksum mismatch")
    lib = GateLibrary(version=d["version"])
    try:
        for name, entry in d["gates"].items():
            if entry["name"] != name:
                raise SchemaError(f"gate key {name!r} does not match its name {entry['name']!r}")
            lib.add(gate_from_dict(entry))
    except ValidationError as exc:
        raise SchemaError(f"invalid gate entry: {exc}") from None
    return lib


def atomic_write_json(obj, path):
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=1)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(lib, path):
    atomic_write_json(library_to_dict(lib), path)


def load(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg})") from None
    return library_from_dict(d)

