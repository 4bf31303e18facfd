"""Time the numba kernels against the pure-numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
run once per path before timing so JIT compilation is excluded. Results are
also checked for agreement between the two paths.
"""

import argparse
import time
import warnings

import numpy as np

from qorc import _accel
from qorc.linalg import haar_random_unitary, permanent, permanent_abs2_batch
from qorc.photonics import NoiseModel, ReservoirCircuit, add_classical_photon, exact_distribution, fock_space


def best_of(fn, repeat):
    fn()  # warm-up (compiles on the numba path)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((14, 14)) + 1j * rng.standard_normal((14, 14))
    u = haar_random_unitary(20, 1)[:, :4]
    rows = rng.integers(0, 20, size=(20000, 4))
    space = fock_space(20, 4)
    p = rng.random(space.size)
    p /= p.sum()
    probs = np.abs(haar_random_unitary(20, 2)[:, 0]) ** 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        circ = ReservoirCircuit.from_seed(12, 3, 0)
    phases = np.linspace(0, 1.5, 12)
    noise = NoiseModel(0.9, 0.02, 0.9)
    return {
        "permanent 14x14": lambda: permanent(a),
        "perm_abs2 batch 20000x(4x4)": lambda: permanent_abs2_batch(u, rows),
        "add_classical_photon M=20 N<=4": lambda: add_classical_photon(p, space, probs),
        "exact_distribution M=12 N=3 noisy": lambda: exact_distribution(circ, phases, noise).probabilities,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can be timed")
    print(f"{'kernel':36s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  rel diff")
    saved = _accel.USE_NUMBA
    try:
        for name, fn in cases().items():
            _accel.USE_NUMBA = False
            t_np, r_np = best_of(fn, args.repeat)
            if _accel.HAVE_NUMBA:
                _accel.USE_NUMBA = True
                t_nb, r_nb = best_of(fn, args.repeat)
                r_np, r_nb = np.atleast_1d(r_np), np.atleast_1d(r_nb)
                diff = float(np.max(np.abs(r_np - r_nb)) / np.max(np.abs(r_np)))
                print(f"{name:36s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:7.1f}x  {diff:.1e}")
            else:
                print(f"{name:36s} {1e3 * t_np:11.3f} {'-':>11s} {'-':>8s}")
    finally:
        _accel.USE_NUMBA = saved


if __name__ == "__main__":
    main()
