"""Variational training of an ansatz against a reference unitary.

Each round draws ``batch_size`` random training states, computes the gradient
of ``-|<U_ref phi | A(J) phi>|^2`` by an adjoint sweep, takes a projected Adam
step (pulse strengths are clamped at zero) and then measures the worst-case
infidelity over the validation set. Training stops once that error drops to the
threshold or the round budget is spent.
"""

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import ansatz, kernels, linalg, states
from .errors import ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    max_rounds: int = 4000
    error_threshold: float = 1e-5
    batch_size: int = 1
    seed: int = 0
    validate_every: int = 1
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    n_train: int = 100
    n_val: int = 100

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be positive")
        if not self.error_threshold > 0:
            raise ValidationError("error_threshold must be positive")
        if self.max_rounds < 1 or self.batch_size < 1 or self.validate_every < 1:
            raise ValidationError("max_rounds, batch_size and validate_every must be >= 1")


@dataclass
class TrainReport:
    rounds_used: int
    final_error: float
    converged: bool
    error_history: list
    loss_history: list
    params: np.ndarray
    learning_rate: float = 0.0
    threshold: float = 1e-5
    seed: int = 0
    sampler_seed: int = 0
    validated_rounds: list = field(default_factory=list)

    @property
    def best_error_history(self):
        """Validation error of the best-so-far parameters after each check."""
        return np.minimum.accumulate(np.asarray(self.error_history)).tolist()

    def to_dict(self):
        d = asdict(self)
        d["params"] = [float(x) for x in self.params]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["params"] = np.asarray(d["params"], dtype=np.float64)
        return cls(**d)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(np.zeros(n), np.zeros(n), 0, beta1, beta2, eps)


def adam_step(params, grads, state, lr):
    """Bias-corrected Adam update followed by projection onto ``J >= 0``.

    ``state`` is advanced in place; the new parameter array is returned.
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValidationError("parameter, gradient and optimizer state shapes differ")
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads * grads
    m_hat = state.m / (1 - state.beta1**state.t)
    v_hat = state.v / (1 - state.beta2**state.t)
    return np.maximum(params - lr * m_hat / (np.sqrt(v_hat) + state.eps), 0.0)


def state_loss(output, target):
    """``-|<target|output>|^2``."""
    return -abs(linalg.inner(target, output)) ** 2


def _batch_loss_grad(spec, prop, inputs, targets):
    lay = spec.layout
    dU = prop.derivatives(spec)
    overlaps, grad = kernels.loss_grad(prop.U, dU, lay.term_start, lay.term_param,
                                       spec.n_params, inputs, targets)
    return -float(np.mean(np.abs(overlaps) ** 2)), grad


def loss_gradients(spec, params, psi_in, target):
    """Gradient of :func:`state_loss` of the ansatz output w.r.t. every parameter."""
    d = 1 << spec.n_qubits
    psi_in = np.asarray(psi_in, dtype=np.complex128)
    target = np.asarray(target, dtype=np.complex128)
    if psi_in.shape != (d,) or target.shape != (d,):
        raise ValidationError(f"states must have dimension {d}")
    prop = ansatz.propagate(spec, params)
    return _batch_loss_grad(spec, prop, psi_in[None, :], target[None, :])[1]


def _max_infidelity(U, inputs, targets):
    out = inputs @ U.T
    fid = np.abs(np.einsum("bi,bi->b", targets.conj(), out)) ** 2
    return float(np.max(1.0 - fid))


def validate(spec, params, U_ref, val):
    """Worst-case ``1 - |<U_ref phi | A phi>|^2`` over the validation states."""
    inputs = np.asarray(val.states if isinstance(val, states.StateSet) else val)
    if inputs.ndim != 2 or inputs.shape[0] == 0:
        raise ValidationError("validation set is empty")
    U_ref = linalg.as_matrix(U_ref, "U_ref")
    if U_ref.shape[0] != 1 << spec.n_qubits:
        raise ValidationError(f"reference unitary {U_ref.shape} does not match {spec.n_qubits} qubits")
    return _max_infidelity(ansatz.evaluate(spec, params), inputs, inputs @ U_ref.T)


def train(U_ref, spec, cfg=None, sampler_seed=0, init=None, callback=None):
    """Train ``spec`` towards ``U_ref``; deterministic for fixed seeds.

    Parameters start at all ones unless ``init`` is given. ``callback``, if set,
    is called as ``callback(round, loss, error_or_None)`` after every round.
    """
    cfg = cfg or TrainConfig()
    U_ref = linalg.as_matrix(U_ref, "U_ref")
    if U_ref.shape[0] != 1 << spec.n_qubits:
        raise ValidationError(f"reference unitary {U_ref.shape} does not match {spec.n_qubits} qubits")
    train_set, val_set = states.sample_sets(spec.n_qubits, cfg.n_train, cfg.n_val, sampler_seed)
    tr_in, val_in = train_set.states, val_set.states
    tr_tg, val_tg = tr_in @ U_ref.T, val_in @ U_ref.T
    rng = np.random.default_rng(cfg.seed)

    params = np.ones(spec.n_params) if init is None else ansatz.check_params(spec, init).copy()
    opt = AdamState.zeros(spec.n_params, cfg.beta1, cfg.beta2, cfg.adam_eps)
    prop = ansatz.propagate(spec, params)
    best_err, best_params = np.inf, params.copy()
    losses, errors, checked = [], [], []
    converged = False
    rounds = 0
    for rounds in range(1, cfg.max_rounds + 1):
        idx = rng.integers(0, len(tr_in), size=cfg.batch_size)
        loss, grad = _batch_loss_grad(spec, prop, tr_in[idx], tr_tg[idx])
        params = adam_step(params, grad, opt, cfg.learning_rate)
        prop = ansatz.propagate(spec, params)
        losses.append(loss)
        err = None
        if rounds % cfg.validate_every == 0 or rounds == cfg.max_rounds:
            err = _max_infidelity(kernels.chain_product(prop.U), val_in, val_tg)
            errors.append(err)
            checked.append(rounds)
            if err < best_err:
                best_err, best_params = err, params.copy()
        if callback is not None:
            callback(rounds, loss, err)
        if err is not None and err <= cfg.error_threshold:
            converged = True
            break
    log.debug("training finished after %d rounds, eps=%.3g", rounds, best_err)
    return TrainReport(
        rounds_used=rounds,
        final_error=float(best_err),
        converged=converged,
        error_history=errors,
        loss_history=losses,
        params=best_params,
        learning_rate=cfg.learning_rate,
        threshold=cfg.error_threshold,
        seed=cfg.seed,
        sampler_seed=sampler_seed,
        validated_rounds=checked,
    )


def train_with_retry(U_ref, spec, cfg=None, sampler_seed=0, learning_rates=(0.1,)):
    """Run :func:`train`; on failure retry with each learning rate in turn.

    Returns the first converged report, or the last attempt's report.
    """
    cfg = cfg or TrainConfig()
    report = train(U_ref, spec, cfg, sampler_seed)
    for lr in learning_rates:
        if report.converged:
            break
        log.info("no convergence at lr=%g, retrying with lr=%g", report.learning_rate, lr)
        cfg = TrainConfig(**{**asdict(cfg), "learning_rate": lr})
        report = train(U_ref, spec, cfg, sampler_seed)
    return report
