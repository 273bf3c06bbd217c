"""Compare the numba and pure-numpy kernels (timing and agreement).

Both implementations are imported directly, so the backend flag does not
matter here. Run: python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from gkpforge import kernels
from gkpforge._backend import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(1)
    psi = rng.normal(size=201) + 1j * rng.normal(size=201)
    psi /= np.linalg.norm(psi)
    betas = (rng.uniform(-4, 4, 2500) + 1j * rng.uniform(-4, 4, 2500)) / np.sqrt(2)
    x = np.linspace(-25, 25, 5001)
    return [
        ("displacement_matrix dim=400", kernels._displacement_matrix_numba, kernels._displacement_matrix_numpy,
         (1.7 - 0.4j, 400)),
        ("hermite_functions n=400 x=5001", kernels._hermite_functions_numba, kernels._hermite_functions_numpy,
         (400, x)),
        ("displaced_parity dim=201 pts=2500", kernels._displaced_parity_numba, kernels._displaced_parity_numpy,
         (psi, betas)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; only the numpy kernels can run")
    print(f"{'kernel':38s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, fast, slow, a in cases():
        t_np, ref = best_of(lambda: slow(*a), args.repeat)
        if HAVE_NUMBA:
            fast(*a)  # compile outside the timed region
            t_nb, out = best_of(lambda: fast(*a), args.repeat)
            diff = float(np.max(np.abs(out - ref)))
            print(f"{name:38s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:9.1e}")
        else:
            print(f"{name:38s} {t_np:10.4f} {'-':>10s}")


if __name__ == "__main__":
    main()
