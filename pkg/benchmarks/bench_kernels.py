"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--n 4 6 8]
"""

import argparse
import timeit

import numpy as np

from hamprobe import _kernels_py

try:
    from hamprobe import _kernels
except ImportError:
    _kernels = None


def cases(n: int, rng):
    dim = 1 << n
    vec = rng.normal(size=1 << (2 * n))
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    coeffs = rng.normal(size=1 << (2 * n)).astype(complex)
    strings = rng.integers(0, 1 << (2 * n), size=1 << (2 * n), dtype=np.uint64)
    gens = rng.integers(0, 1 << (2 * n), size=min(2 * n, 8), dtype=np.uint64)
    return {
        "fwht": (lambda m: m.fwht(vec.copy()), vec.size),
        "pauli_coefficients": (lambda m: m.pauli_coefficients(mat), mat.size),
        "pauli_synthesize": (lambda m: m.pauli_synthesize(coeffs, n), coeffs.size),
        "symplectic_syndromes": (lambda m: m.symplectic_syndromes(strings, gens, n), strings.size),
    }


def best_time(fn, repeat: int) -> float:
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, nargs="+", default=[4, 6, 8])
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; run: python3 setup.py build_ext --inplace")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>3}{'size':>9}{'python (us)':>14}{'cython (us)':>14}{'speedup':>9}")
    for n in args.n:
        for name, (call, size) in cases(n, rng).items():
            t_py = best_time(lambda: call(_kernels_py), args.repeat)
            if _kernels is None:
                print(f"{name:<22}{n:>3}{size:>9}{t_py * 1e6:>14.1f}{'-':>14}{'-':>9}")
                continue
            ref, got = call(_kernels_py), call(_kernels)
            if not np.allclose(ref, got, atol=1e-9):
                raise SystemExit(f"{name} at n={n}: backends disagree")
            t_cy = best_time(lambda: call(_kernels), args.repeat)
            print(f"{name:<22}{n:>3}{size:>9}{t_py * 1e6:>14.1f}{t_cy * 1e6:>14.1f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
