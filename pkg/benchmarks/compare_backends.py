"""Benchmark the numba kernels against the pure-NumPy fallbacks.

Covers the two hot kernels (deviation scan, best-response iteration) and
one end-to-end workload (full five-node equilibrium enumeration).  Run:

    python3 benchmarks/compare_backends.py
"""

import time

import numpy as np

from lqnet import kernels
from lqnet._backend import NUMBA_AVAILABLE
from lqnet.model import get_treatment
from lqnet.verifier import enumerate_ne_networks


def bench(label, fn, repeat=5):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return label, min(times)


def deviation_inputs(rng, n):
    efforts = rng.uniform(0.0, 20.0, n)
    m = rng.random((n, n)) < 0.5
    np.fill_diagonal(m, False)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    own = (m.astype(np.int64) * weights).sum(axis=1)
    incoming = (m.T.astype(np.int64) * weights).sum(axis=1)
    return efforts, incoming, own


def main():
    if not NUMBA_AVAILABLE:
        print("numba is not importable; only the numpy backend can run")
        return
    rng = np.random.default_rng(0)
    p9 = get_treatment("N9_HighCost").params
    batch9 = [deviation_inputs(rng, 9) for _ in range(500)]
    batch16 = [deviation_inputs(rng, 16) for _ in range(20)]
    m = np.triu(rng.random((9, 9)) < 0.6, 1)
    adj = m | m.T
    x0 = np.zeros(9)

    def scan(backend, batch):
        for efforts, incoming, own in batch:
            kernels.deviation_scan(
                efforts, incoming, own, p9.theta, p9.beta, p9.lam, p9.kappa,
                0.0, 20.0, backend=backend,
            )

    def iterate(backend):
        for _ in range(300):
            kernels.br_iteration(
                adj, x0, 10.0, 4.0, 0.26, 0.0, 20.0, tol=1e-12, backend=backend
            )

    def enumerate5(backend):
        enumerate_ne_networks(get_treatment("N5_HighCost").params, backend=backend)

    # trigger JIT before timing
    scan("numba", batch9[:1])
    kernels.br_iteration(adj, x0, 10.0, 4.0, 0.26, 0.0, 20.0, backend="numba")

    rows = []
    for backend in ("numba", "numpy"):
        rows.append(bench(f"deviation_scan n=9 x500 [{backend}]", lambda b=backend: scan(b, batch9)))
        rows.append(bench(f"deviation_scan n=16 x20 [{backend}]", lambda b=backend: scan(b, batch16)))
        rows.append(bench(f"br_iteration n=9 x300   [{backend}]", lambda b=backend: iterate(b)))
        rows.append(bench(f"enumerate 34 graphs n=5 [{backend}]", lambda b=backend: enumerate5(b), repeat=3))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload'.ljust(width)}  best of runs")
    for label, secs in rows:
        print(f"{label.ljust(width)}  {secs * 1e3:9.2f} ms")
    pairs = {}
    for label, secs in rows:
        key = label.rsplit("[", 1)[0].strip()
        pairs.setdefault(key, {})[label.rsplit("[", 1)[1].rstrip("]")] = secs
    print()
    for key, vals in pairs.items():
        if {"numba", "numpy"} <= set(vals):
            print(f"{key.ljust(width)}  numpy/numba = {vals['numpy'] / vals['numba']:.1f}x")


if __name__ == "__main__":
    main()
