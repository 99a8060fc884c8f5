"""Variational pulse-level compilation for exchange-coupled DQD spin-qubit chains."""

from .ansatz import AnsatzSpec, evaluate, evaluate_with_jacobian, single_qubit_ansatz, two_qubit_ansatz
from .errors import (CapacityError, CompilationFailed, ConstraintViolation, DQDError, SchemaError,
                     StructuralError, ValidationError)
from .executor import execute, executed_unitary, measure_distribution
from .kernels import active_backend, available_backends, use_backend
from .library import CompiledGate, GateLibrary, build_library, compile_standard
from .model import ChainSpec, PulseSegment, chain_hamiltonian, h1q, h2q, native_1q
from .scheduler import CircuitIR, LogicalOp, Schedule, schedule, verify_schedule
from .trainer import TrainConfig, TrainReport, train

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec", "CapacityError", "ChainSpec", "CircuitIR", "CompilationFailed", "CompiledGate",
    "ConstraintViolation", "DQDError", "GateLibrary", "LogicalOp", "PulseSegment", "Schedule",
    "SchemaError", "StructuralError", "TrainConfig", "TrainReport", "ValidationError",
    "active_backend", "available_backends", "build_library", "chain_hamiltonian", "compile_standard",
    "evaluate", "evaluate_with_jacobian", "execute", "executed_unitary", "h1q", "h2q",
    "measure_distribution", "native_1q", "schedule", "single_qubit_ansatz", "train",
    "two_qubit_ansatz", "use_backend", "verify_schedule",
]
