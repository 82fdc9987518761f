"""Compare the compiled kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--n 64 128 256] [--repeat 20]

Prints one line per (kernel, n) with the median time of each backend, the
speedup and the largest absolute difference between the two results.
"""
import argparse
import statistics
import time

import numpy as np

from thinfilm.kernels import compiled_backend, numpy_backend


def _median_time(fn, repeat):
    fn()
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def _cases(n, rng):
    h = 1.0 / n
    shape = (2 * n + 1, n)
    m = rng.standard_normal(shape + (3,))
    m /= np.linalg.norm(m, axis=-1, keepdims=True)
    g = rng.standard_normal(shape + (3,))
    a = rng.standard_normal(shape + (3,))
    u = rng.standard_normal(shape + (2,)) * 0.5
    return {
        "d1h": lambda b: b.d1h(m, h),
        "d2h": lambda b: b.d2h(m, h),
        "laplacian_h": lambda b: b.laplacian_h(m, h),
        "llg_velocity": lambda b: b.llg_velocity(m, g, a, 0.05, 0.02),
        "gl_energy_grad": lambda b: b.gl_energy_grad(u, h, 0.05)[1],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if compiled_backend is None:
        print("compiled backend not built; timing the numpy fallback only")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16}{'n':>6}{'numpy [ms]':>13}{'compiled [ms]':>15}{'speedup':>9}{'max diff':>11}")
    for n in args.n:
        for name, call in _cases(n, rng).items():
            t_np = _median_time(lambda: call(numpy_backend), args.repeat)
            if compiled_backend is None:
                print(f"{name:<16}{n:>6}{1e3 * t_np:>13.3f}{'-':>15}{'-':>9}{'-':>11}")
                continue
            t_c = _median_time(lambda: call(compiled_backend), args.repeat)
            diff = float(np.max(np.abs(call(numpy_backend) - call(compiled_backend))))
            print(f"{name:<16}{n:>6}{1e3 * t_np:>13.3f}{1e3 * t_c:>15.3f}{t_np / t_c:>9.2f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
