"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--max-bits 20]
"""
import argparse
import timeit

import numpy as np

from qdtl import _kernels_py as python_backend
from qdtl.kernels import compiled_backend


def best_time(func, repeat: int) -> float:
    return min(timeit.repeat(func, number=1, repeat=repeat))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--max-bits", type=int, default=20)
    args = parser.parse_args()
    if compiled_backend is None:
        raise SystemExit("compiled extension not built; run pip install -e . first")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>4}{'numpy ms':>12}{'cython ms':>12}{'speedup':>10}")
    for n in range(8, args.max_bits + 1, 4):
        data = rng.standard_normal(1 << n)
        masks = rng.integers(0, 1 << n, size=1 << n, dtype=np.uint64)
        xs = rng.integers(0, 1 << n, size=1 << n, dtype=np.uint64)
        cases = {
            "fwht": (lambda b: (lambda: b.fwht(data.copy()))),
            "parity_vector": (lambda b: (lambda: b.parity_vector(0b1011 % (1 << n), n))),
            "parity_batch": (lambda b: (lambda: b.parity_batch(masks, xs))),
        }
        for name, make in cases.items():
            slow = best_time(make(python_backend), args.repeat) * 1e3
            fast = best_time(make(compiled_backend), args.repeat) * 1e3
            print(f"{name:<14}{n:>4}{slow:>12.3f}{fast:>12.3f}{slow / fast:>10.1f}")


if __name__ == "__main__":
    main()
