"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_backends.py [--size 512] [--repeat 5]

Reports the best-of-N wall time per operation for each backend and checks that
both produce identical arrays.
"""
import argparse
import time

import numpy as np

from mpctv import _backend
from mpctv.image_core import median3x3
from mpctv.noise import NoiseSpec, add_noise
from mpctv.solver import Method, SolverConfig, denoise, tv_step


def best_of(fn, repeat):
    fn()  # warm-up (numba compiles on first call)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if not _backend.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
    rng = np.random.default_rng(0)
    clean = rng.uniform(0, 255, size=(args.size, args.size))
    u0 = add_noise(clean, NoiseSpec("gaussian", variance=300, seed=0))
    cfg = SolverConfig()
    cases = {
        "tv_step": lambda: tv_step(u0, u0, cfg),
        "median3x3": lambda: median3x3(u0),
        "mpc-tv iteration": lambda: denoise(u0, cfg.with_(method=Method.MPC_TV, iterations=1))[0],
    }
    backends = [False, True] if _backend.HAVE_NUMBA else [False]
    print(f"{'operation':<18}{'numpy':>12}{'numba':>12}{'speedup':>10}  identical")
    for name, fn in cases.items():
        res = {}
        for flag in backends:
            with _backend.use_numba(flag):
                res[flag] = best_of(fn, args.repeat)
        t_np = res[False][0]
        if True in res:
            t_nb = res[True][0]
            same = np.array_equal(res[False][1], res[True][1])
            print(f"{name:<18}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x  {same}")
        else:
            print(f"{name:<18}{t_np * 1e3:>10.2f}ms{'-':>12}{'-':>10}  -")


if __name__ == "__main__":
    main()
