"""Hot kernels for piecewise-constant evolution of a DQD chain.

Every slice Hamiltonian splits into a real diagonal part (pulse and coupling
terms) plus the shared transverse sum ``X = sum_q sigma_x^q``, so it is real
symmetric and its eigenvectors are real. Parameter derivatives of a slice
Hamiltonian are purely diagonal. The kernels below take

    hdiag       (S, d)  float   diagonal of each slice Hamiltonian
    xsum        (d, d)  float   transverse part, shared by all slices
    dt          (S,)    float   slice durations
    term_start  (S+1,)  int     CSR offsets: derivative terms of slice s are
                                ``term_start[s]:term_start[s+1]``
    term_param  (T,)    int     parameter index each derivative term feeds
    dhdiag      (T, d)  float   diagonal of dH for each derivative term

Two implementations with identical signatures exist: numba ``@njit`` loops and
vectorised numpy. ``DQDCOMPILE_DISABLE_NUMBA=1`` selects numpy at import;
:func:`use_backend` switches at runtime (benchmarks, cross-checks).
"""

from contextlib import contextmanager

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# numba kernels


@njit
def _sinc(x):
    if abs(x) < 1e-4:
        return 1.0 - x * x / 6.0
    return np.sin(x) / x


@njit
def _propagators_nb(hdiag, xsum, dt):
    n_slices, d = hdiag.shape
    U = np.empty((n_slices, d, d), dtype=np.complex128)
    W = np.empty((n_slices, d))
    V = np.empty((n_slices, d, d))
    H = np.empty((d, d))
    for s in range(n_slices):
        for i in range(d):
            for j in range(d):
                H[i, j] = xsum[i, j]
            H[i, i] += hdiag[s, i]
        w, v = np.linalg.eigh(H)
        W[s] = w
        V[s] = v
        ph = np.exp(-1j * w * dt[s])
        for i in range(d):
            for j in range(d):
                acc = 0j
                for k in range(d):
                    acc += v[i, k] * ph[k] * v[j, k]
                U[s, i, j] = acc
    return U, W, V


@njit
def _derivatives_nb(W, V, dt, term_start, dhdiag):
    n_slices, d = W.shape
    n_terms = dhdiag.shape[0]
    dU = np.empty((n_terms, d, d), dtype=np.complex128)
    G = np.empty((d, d), dtype=np.complex128)
    M = np.empty((d, d), dtype=np.complex128)
    VM = np.empty((d, d), dtype=np.complex128)
    for s in range(n_slices):
        t0 = term_start[s]
        t1 = term_start[s + 1]
        if t0 == t1:
            continue
        w = W[s]
        v = V[s]
        t = dt[s]
        for j in range(d):
            for k in range(d):
                G[j, k] = (-1j * t * np.exp(-0.5j * (w[j] + w[k]) * t)
                           * _sinc(0.5 * (w[j] - w[k]) * t))
        for term in range(t0, t1):
            delta = dhdiag[term]
            # M = G o (V^T diag(delta) V)
            for j in range(d):
                for k in range(d):
                    acc = 0.0
                    for m in range(d):
                        acc += v[m, j] * delta[m] * v[m, k]
                    M[j, k] = G[j, k] * acc
            # dU = V M V^T
            for i in range(d):
                for k in range(d):
                    acc = 0j
                    for j in range(d):
                        acc += v[i, j] * M[j, k]
                    VM[i, k] = acc
            for i in range(d):
                for k in range(d):
                    acc = 0j
                    for j in range(d):
                        acc += VM[i, j] * v[k, j]
                    dU[term, i, k] = acc
    return dU


@njit
def _chain_product_nb(U):
    n_slices, d, _ = U.shape
    out = np.eye(d, dtype=np.complex128)
    tmp = np.empty((d, d), dtype=np.complex128)
    for s in range(n_slices):
        for i in range(d):
            for j in range(d):
                acc = 0j
                for k in range(d):
                    acc += U[s, i, k] * out[k, j]
                tmp[i, j] = acc
        out[:, :] = tmp
    return out


@njit
def _evolve_nb(U, states):
    n_slices, d, _ = U.shape
    n_states = states.shape[0]
    cur = states.copy()
    nxt = np.empty_like(cur)
    for s in range(n_slices):
        for b in range(n_states):
            for i in range(d):
                acc = 0j
                for k in range(d):
                    acc += U[s, i, k] * cur[b, k]
                nxt[b, i] = acc
        cur, nxt = nxt, cur
    return cur


@njit
def _loss_grad_nb(U, dU, term_start, term_param, n_params, inputs, targets):
    n_slices, d, _ = U.shape
    n_states = inputs.shape[0]
    hist = np.empty((n_slices + 1, n_states, d), dtype=np.complex128)
    hist[0] = inputs
    for s in range(n_slices):
        for b in range(n_states):
            for i in range(d):
                acc = 0j
                for k in range(d):
                    acc += U[s, i, k] * hist[s, b, k]
                hist[s + 1, b, i] = acc
    overlaps = np.empty(n_states, dtype=np.complex128)
    for b in range(n_states):
        acc = 0j
        for i in range(d):
            acc += np.conj(targets[b, i]) * hist[n_slices, b, i]
        overlaps[b] = acc
    grad = np.zeros(n_params)
    lam = targets.copy()
    tmp = np.empty(d, dtype=np.complex128)
    for s in range(n_slices - 1, -1, -1):
        for term in range(term_start[s], term_start[s + 1]):
            p = term_param[term]
            for b in range(n_states):
                dc = 0j
                for i in range(d):
                    acc = 0j
                    for k in range(d):
                        acc += dU[term, i, k] * hist[s, b, k]
                    dc += np.conj(lam[b, i]) * acc
                grad[p] += -2.0 * (np.conj(overlaps[b]) * dc).real / n_states
        for b in range(n_states):
            for i in range(d):
                acc = 0j
                for k in range(d):
                    acc += np.conj(U[s, k, i]) * lam[b, k]
                tmp[i] = acc
            for i in range(d):
                lam[b, i] = tmp[i]
    return overlaps, grad


@njit
def _state_jacobian_nb(U, dU, term_start, term_param, n_params, psi):
    n_slices, d, _ = U.shape
    hist = np.empty((n_slices + 1, d), dtype=np.complex128)
    hist[0] = psi
    for s in range(n_slices):
        for i in range(d):
            acc = 0j
            for k in range(d):
                acc += U[s, i, k] * hist[s, k]
            hist[s + 1, i] = acc
    jac = np.zeros((n_params, d), dtype=np.complex128)
    tail = np.eye(d, dtype=np.complex128)
    tmp = np.empty((d, d), dtype=np.complex128)
    vec = np.empty(d, dtype=np.complex128)
    for s in range(n_slices - 1, -1, -1):
        for term in range(term_start[s], term_start[s + 1]):
            p = term_param[term]
            for i in range(d):
                acc = 0j
                for k in range(d):
                    acc += dU[term, i, k] * hist[s, k]
                vec[i] = acc
            for i in range(d):
                acc = 0j
                for k in range(d):
                    acc += tail[i, k] * vec[k]
                jac[p, i] += acc
        for i in range(d):
            for j in range(d):
                acc = 0j
                for k in range(d):
                    acc += tail[i, k] * U[s, k, j]
                tmp[i, j] = acc
        tail[:, :] = tmp
    return hist[n_slices].copy(), jac


# ---------------------------------------------------------------------------
# numpy twins


def _propagators_np(hdiag, xsum, dt):
    n_slices, d = hdiag.shape
    H = np.broadcast_to(xsum, (n_slices, d, d)).copy()
    idx = np.arange(d)
    H[:, idx, idx] += hdiag
    W, V = np.linalg.eigh(H)
    ph = np.exp(-1j * W * dt[:, None])
    U = (V * ph[:, None, :]) @ np.swapaxes(V, 1, 2)
    return U, W, V


def _derivatives_np(W, V, dt, term_start, dhdiag):
    counts = np.diff(term_start)
    slice_of = np.repeat(np.arange(len(counts)), counts)
    w = W[slice_of]
    v = V[slice_of]
    t = dt[slice_of][:, None, None]
    wsum = w[:, :, None] + w[:, None, :]
    wdiff = w[:, :, None] - w[:, None, :]
    G = -1j * t * np.exp(-0.5j * wsum * t) * np.sinc(wdiff * t / (2 * np.pi))
    vt = np.swapaxes(v, 1, 2)
    inner = (vt * dhdiag[:, None, :]) @ v
    return v @ (G * inner) @ vt


def _chain_product_np(U):
    out = np.eye(U.shape[1], dtype=np.complex128)
    for u in U:
        out = u @ out
    return out


def _evolve_np(U, states):
    cur = np.array(states, dtype=np.complex128)
    for u in U:
        cur = cur @ u.T
    return cur


def _loss_grad_np(U, dU, term_start, term_param, n_params, inputs, targets):
    n_slices = U.shape[0]
    n_states = inputs.shape[0]
    hist = [np.asarray(inputs, dtype=np.complex128)]
    for u in U:
        hist.append(hist[-1] @ u.T)
    overlaps = np.einsum("bi,bi->b", targets.conj(), hist[-1])
    grad = np.zeros(n_params)
    lam = np.asarray(targets, dtype=np.complex128)
    for s in range(n_slices - 1, -1, -1):
        t0, t1 = term_start[s], term_start[s + 1]
        if t1 > t0:
            moved = np.einsum("tik,bk->tbi", dU[t0:t1], hist[s])
            dc = np.einsum("bi,tbi->tb", lam.conj(), moved)
            contrib = -2.0 * (overlaps.conj()[None, :] * dc).real.sum(axis=1) / n_states
            np.add.at(grad, term_param[t0:t1], contrib)
        lam = lam @ U[s].conj()
    return overlaps, grad


def _state_jacobian_np(U, dU, term_start, term_param, n_params, psi):
    n_slices, d, _ = U.shape
    hist = [np.asarray(psi, dtype=np.complex128)]
    for u in U:
        hist.append(u @ hist[-1])
    jac = np.zeros((n_params, d), dtype=np.complex128)
    tail = np.eye(d, dtype=np.complex128)
    for s in range(n_slices - 1, -1, -1):
        t0, t1 = term_start[s], term_start[s + 1]
        if t1 > t0:
            vecs = (dU[t0:t1] @ hist[s]) @ tail.T
            np.add.at(jac, term_param[t0:t1], vecs)
        tail = tail @ U[s]
    return hist[-1], jac


# ---------------------------------------------------------------------------
# dispatch

_BACKENDS = {
    "numpy": {
        "propagators": _propagators_np,
        "derivatives": _derivatives_np,
        "chain_product": _chain_product_np,
        "evolve": _evolve_np,
        "loss_grad": _loss_grad_np,
        "state_jacobian": _state_jacobian_np,
    },
}
if USE_NUMBA:
    _BACKENDS["numba"] = {
        "propagators": _propagators_nb,
        "derivatives": _derivatives_nb,
        "chain_product": _chain_product_nb,
        "evolve": _evolve_nb,
        "loss_grad": _loss_grad_nb,
        "state_jacobian": _state_jacobian_nb,
    }

_active = "numba" if USE_NUMBA else "numpy"


def available_backends():
    return sorted(_BACKENDS)


def active_backend():
    return _active


@contextmanager
def use_backend(name):
    """Temporarily route every kernel call through backend ``name``."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    previous, _active = _active, name
    try:
        yield
    finally:
        _active = previous


def propagators(hdiag, xsum, dt):
    """Return ``(U, W, V)``: slice propagators ``exp(-i H_s dt_s)`` plus the
    eigenvalues and (real, orthonormal) eigenvectors of each ``H_s``."""
    return _BACKENDS[_active]["propagators"](
        np.ascontiguousarray(hdiag, dtype=np.float64),
        np.ascontiguousarray(xsum, dtype=np.float64),
        np.ascontiguousarray(dt, dtype=np.float64),
    )


def derivatives(W, V, dt, term_start, dhdiag):
    """Exact propagator derivatives ``d/dtheta exp(-i H dt)`` for each term.

    Uses the divided-difference form of the Frechet derivative in the
    eigenbasis of ``H``, written with ``sinc`` so degenerate eigenvalues need
    no special case.
    """
    return _BACKENDS[_active]["derivatives"](
        W, V, np.ascontiguousarray(dt, dtype=np.float64),
        np.ascontiguousarray(term_start, dtype=np.int64),
        np.ascontiguousarray(dhdiag, dtype=np.float64),
    )


def chain_product(U):
    """Time-ordered product ``U[-1] @ ... @ U[0]``."""
    return _BACKENDS[_active]["chain_product"](np.ascontiguousarray(U))


def evolve(U, states):
    """Apply the slice propagators in time order to each row of ``states``."""
    return _BACKENDS[_active]["evolve"](
        np.ascontiguousarray(U), np.ascontiguousarray(states, dtype=np.complex128)
    )


def loss_grad(U, dU, term_start, term_param, n_params, inputs, targets):
    """Batch-mean gradient of ``-|<target|out>|^2`` by one forward and one
    adjoint sweep. Returns ``(overlaps, grad)``."""
    return _BACKENDS[_active]["loss_grad"](
        np.ascontiguousarray(U), np.ascontiguousarray(dU),
        np.ascontiguousarray(term_start, dtype=np.int64),
        np.ascontiguousarray(term_param, dtype=np.int64), int(n_params),
        np.ascontiguousarray(inputs, dtype=np.complex128),
        np.ascontiguousarray(targets, dtype=np.complex128),
    )


def state_jacobian(U, dU, term_start, term_param, n_params, psi):
    """Output state and its derivative w.r.t. every parameter, shape ``(P, d)``."""
    return _BACKENDS[_active]["state_jacobian"](
        np.ascontiguousarray(U), np.ascontiguousarray(dU),
        np.ascontiguousarray(term_start, dtype=np.int64),
        np.ascontiguousarray(term_param, dtype=np.int64), int(n_params),
        np.ascontiguousarray(psi, dtype=np.complex128),
    )
