"""Compare the numba and pure-numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 200]

Set DQDCOMPILE_DISABLE_NUMBA=1 to confirm the fallback runs on its own.
"""

import argparse
import timeit

import numpy as np

from dqdcompile import ansatz, kernels, trainer
from dqdcompile.gates import reference_unitary
from dqdcompile.states import sample_sets


def cases():
    rng = np.random.default_rng(0)
    for label, spec, ref in [("1q x12", ansatz.single_qubit_ansatz(), reference_unitary("H")),
                             ("2q io-eg-io", ansatz.two_qubit_ansatz(), reference_unitary("CX"))]:
        params = rng.uniform(0.2, 2.0, spec.n_params)
        train_set, _ = sample_sets(spec.n_qubits, 4, 1, seed=0)
        psi = train_set.states[0]
        target = ref @ psi
        yield label, "jacobian", lambda s=spec, p=params, x=psi: ansatz.evaluate_with_jacobian(s, p, x)
        yield label, "loss-grad", lambda s=spec, p=params, x=psi, t=target: trainer.loss_gradients(s, p, x, t)
        yield label, "unitary", lambda s=spec, p=params: ansatz.evaluate(s, p)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    backends = kernels.available_backends()
    rows = []
    for label, kind, fn in cases():
        times = {}
        for b in backends:
            with kernels.use_backend(b):
                fn()  # warm-up / JIT
                times[b] = min(timeit.repeat(fn, number=args.repeat, repeat=3)) / args.repeat
        rows.append((label, kind, times))
    print(f"{'case':14s} {'kernel':10s} " + " ".join(f"{b + ' [us]':>12s}" for b in backends)
          + ("     speedup" if len(backends) > 1 else ""))
    for label, kind, times in rows:
        line = f"{label:14s} {kind:10s} " + " ".join(f"{times[b] * 1e6:12.1f}" for b in backends)
        if "numba" in times and "numpy" in times:
            line += f"  {times['numpy'] / times['numba']:9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
