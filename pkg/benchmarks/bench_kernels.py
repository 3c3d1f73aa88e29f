"""Timing comparison of the hot kernels: numba @njit vs pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py

Times the unital-bound solver and the local-unitary ascent on fixed seeded
instances under both backends (the numba variant is compiled and warmed
before timing).  With ERGOLOC_BACKEND unset the package picks numba when
importable; this script times both explicitly.
"""

from __future__ import annotations

import time

import numpy as np

from ergoloc import gpo, kernels, qmat, sdp
from ergoloc.backend import HAS_NUMBA


def _random_system(d_s, d_e, seed):
    rng = np.random.default_rng(seed)
    bs, be = gpo.gpo_basis(d_s), gpo.gpo_basis(d_e)
    coeff = rng.normal(size=(len(bs), len(be))) / np.sqrt(len(bs) * len(be))
    v = np.einsum("ij,iab,jcd->acbd", coeff, bs.elements, be.elements)
    return qmat.BipartiteSystem.build(
        d_s,
        d_e,
        qmat.random_density(d_s * d_e, rng),
        qmat.random_hermitian(d_s, rng),
        qmat.random_hermitian(d_e, rng),
        v.reshape(d_s * d_e, d_s * d_e),
    )


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_ascent(backend, repeats=5):
    system = _random_system(2, 6, seed=7)
    h = system.total_hamiltonian()
    u0 = qmat.haar_unitary(2, np.random.default_rng(1))

    def run():
        kernels.ascent_kernel(system.rho, h, u0, 2, 6, 5000, 1e-9, backend=backend)

    run()  # warm (compiles under numba)
    return _time(run, repeats)


def bench_admm(backend, d_s, repeats=5):
    system = _random_system(d_s, 3, seed=11)
    cost = sdp.choi_cost(system)

    def run():
        kernels.admm_kernel(cost.c, d_s, tol=1e-7, backend=backend)

    run()
    return _time(run, repeats)


def main():
    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    rows = []
    for backend in backends:
        rows.append(("ascent 2x6", backend, bench_ascent(backend)))
        rows.append(("admm d_s=2", backend, bench_admm(backend, 2)))
        rows.append(("admm d_s=3", backend, bench_admm(backend, 3)))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  backend  best wall time")
    for name, backend, t in rows:
        print(f"{name:<{width}}  {backend:<7}  {t * 1e3:9.3f} ms")
    if HAS_NUMBA:
        print()
        for name in dict.fromkeys(r[0] for r in rows):
            t_np = next(t for n, b, t in rows if n == name and b == "numpy")
            t_nb = next(t for n, b, t in rows if n == name and b == "numba")
            print(f"{name:<{width}}  speedup x{t_np / t_nb:.1f}")


if __name__ == "__main__":
    main()
