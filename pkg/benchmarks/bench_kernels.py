"""Time the compiled and the NumPy Magnus sweep on the same inputs.

    python3 benchmarks/bench_kernels.py [--nx 3201] [--nz 513] [--repeat 3]
"""

import argparse
import time

import numpy as np

from hirota import _sweep_py

try:
    from hirota import _sweep
except ImportError:  # extension not built
    _sweep = None


def inputs(nx, nz):
    x = np.linspace(-40, 40, nx)
    h = x[1] - x[0]
    q = 0.3 / np.cosh(x) + 0j
    qm = 0.3 / np.cosh(x[:-1] + h / 2) + 0j
    z = np.linspace(-6, 6, nz) + 0j
    phi0 = np.tile(np.eye(2, dtype=np.complex128), (nz, 1, 1))
    return q, qm, h, z, phi0


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nx", type=int, default=3201)
    ap.add_argument("--nz", type=int, default=513)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    q, qm, h, z, phi0 = inputs(a.nx, a.nz)
    t_py, (m_py, _) = best_of(lambda: _sweep_py.magnus_sweep(q, qm, h, z, phi0), a.repeat)
    print(f"numpy   {t_py:8.3f} s   ({a.nx} nodes x {a.nz} z)")
    if _sweep is None:
        print("cython  not built")
        return
    t_cy, (m_cy, _) = best_of(lambda: _sweep.magnus_sweep(q, qm, h, z, phi0), a.repeat)
    diff = float(np.max(np.abs(m_cy - m_py)))
    print(f"cython  {t_cy:8.3f} s   speedup {t_py / t_cy:5.1f}x   max |diff| {diff:.1e}")


if __name__ == "__main__":
    main()
