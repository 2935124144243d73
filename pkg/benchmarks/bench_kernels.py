"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per call for every available backend and checks
that the backends agree on the same inputs.
"""
import argparse
import timeit

import numpy as np

from ghostdiff import kernels
from ghostdiff.grid import SampleGrid


def _accumulate_case(n=4096, frames=250, n_blocks=20):
    rng = np.random.default_rng(0)
    grid = SampleGrid(n, 1e-6)
    arm1 = rng.exponential(size=(frames, n))
    arm2 = rng.exponential(size=(frames, n))
    cols2 = np.arange(1, n, dtype=np.int64)
    cols1 = np.ascontiguousarray(grid.mirror_index[1:], dtype=np.int64)

    def run(backend):
        s1 = np.zeros((n_blocks, n - 1))
        s2 = np.zeros_like(s1)
        s12 = np.zeros_like(s1)
        counts = np.zeros(n_blocks, dtype=np.int64)
        backend.accumulate_pairs(arm1, arm2, cols1, cols2, 7, s1, s2, s12, counts)
        return s12

    return f"accumulate_pairs  {frames} frames x {n} samples", run


def _fresnel_case(n=256, dx=1.2e-6, wavelength=0.0532e-6, distance=6e-3):
    rng = np.random.default_rng(1)
    x = (np.arange(n) - n // 2) * dx
    u = rng.normal(size=n) + 1j * rng.normal(size=n)

    def run(backend):
        return backend.fresnel_direct(u, x, x, wavelength, distance, -1)

    return f"fresnel_direct    {n} x {n} direct sum", run


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    names = kernels.available_backends()
    if "cython" not in names:
        print("compiled extension not built; timing the numpy fallback only")
    for label, run in (_accumulate_case(), _fresnel_case()):
        results, times = {}, {}
        for name in names:
            backend = kernels.get_backend(name)
            results[name] = run(backend)
            times[name] = min(timeit.repeat(lambda: run(backend), number=1, repeat=args.repeat))
        line = f"{label}: " + "  ".join(f"{k} {v * 1e3:8.2f} ms" for k, v in times.items())
        if len(times) == 2:
            line += f"  speedup x{times['python'] / times['cython']:.1f}"
            ref = results["python"]
            diff = np.max(np.abs(results["cython"] - ref)) / np.max(np.abs(ref))
            line += f"  max rel diff {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
