"""Time the numba kernels against the pure-numpy fallback.

Kernel timings run both variants in this process. The end-to-end fit runs once
per backend in a child process, since the backend is fixed at import time by
``LATENTCLASS_BACKEND``.

    python benchmarks/bench_kernels.py [--n 20000] [--classes 5] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from latentclass import _kernels as k

FIT_SNIPPET = """
import json, time
from latentclass import _kernels
from latentclass.documents import five_class_survey_model
from latentclass.model import EmConfig, fit_em
from latentclass.synthetic import sample_dataset
doc = five_class_survey_model()
ds = sample_dataset(doc.params, doc.default_schema(), {n}, seed=1)
fit_em(ds.responses, 2, EmConfig(n_restarts=1, max_iterations=3, seed=0))  # warm-up / JIT
t0 = time.perf_counter()
fit = fit_em(ds.responses, {classes}, EmConfig(n_restarts={restarts}, seed=0))
elapsed = time.perf_counter() - t0
print(json.dumps({{"backend": _kernels.BACKEND, "seconds": elapsed,
                  "iterations": fit.iterations_used, "ll": fit.log_likelihood}}))
"""


def kernel_inputs(n, n_classes, n_ind, k_max, seed=0):
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, k_max, size=(n, n_ind)).astype(np.int64)
    cond = rng.random((n_classes, n_ind, k_max)) + 0.05
    cond /= cond.sum(axis=2, keepdims=True)
    shares = np.full(n_classes, 1.0 / n_classes)
    weights = rng.random((n, n_classes))
    return codes, np.log(cond), np.log(shares), weights


def time_kernels(n, n_classes, repeat):
    codes, log_cond, log_shares, weights = kernel_inputs(n, n_classes, 12, 5)
    cases = {
        "joint_log_density": (k.numpy_joint_log_density, k.numba_joint_log_density,
                              (codes, log_cond)),
        "e_step": (k.numpy_e_step, k.numba_e_step, (codes, log_cond, log_shares)),
        "m_step_counts": (k.numpy_m_step_counts, k.numba_m_step_counts, (codes, weights, 5)),
    }
    rows = []
    for name, (np_fn, nb_fn, args) in cases.items():
        nb_fn(*args)  # compile outside the timed region
        t_np = min(timeit.repeat(lambda: np_fn(*args), number=1, repeat=repeat))
        t_nb = min(timeit.repeat(lambda: nb_fn(*args), number=1, repeat=repeat))
        rows.append((name, t_np, t_nb))
    return rows


def time_fit(backend, n, n_classes, restarts):
    env = dict(os.environ, LATENTCLASS_BACKEND=backend)
    code = FIT_SNIPPET.format(n=n, classes=n_classes, restarts=restarts)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--classes", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--restarts", type=int, default=2)
    args = ap.parse_args(argv)

    print(f"kernels, n={args.n} rows, J=12, K=5, R={args.classes} (best of {args.repeat})")
    print(f"{'kernel':<20}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, t_np, t_nb in time_kernels(args.n, args.classes, args.repeat):
        print(f"{name:<20}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}")

    print(f"\nfit_em on {args.n} rows sampled from the five-class table, "
          f"R={args.classes}, {args.restarts} restarts")
    results = {b: time_fit(b, args.n, args.classes, args.restarts) for b in ("numpy", "numba")}
    for b, res in results.items():
        print(f"{b:<8}{res['seconds']:>9.2f} s  iterations={res['iterations']}  "
              f"LL={res['ll']:.6f}")
    print(f"speedup {results['numpy']['seconds'] / results['numba']['seconds']:.1f}x")


if __name__ == "__main__":
    main()
