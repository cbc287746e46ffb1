"""Compare the compiled forward-kinematics kernel against the numpy fallback.

Run:  python3 benchmarks/bench_fk.py
"""
import time

import numpy as np

from dancedesk import quat
from dancedesk._kernels import KERNEL
from dancedesk._kernels.fk_numpy import fk_positions as fk_numpy
from dancedesk.skeleton import N_JOINTS, default_skeleton

try:
    from dancedesk._kernels._fk_cy import fk_positions as fk_cython
except ImportError:
    fk_cython = None


def bench(fn, root, quats, parents, offsets, repeats=20):
    fn(root, quats, parents, offsets)  # warm up
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(root, quats, parents, offsets)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    skeleton = default_skeleton()
    rng = np.random.default_rng(0)
    print(f"active kernel: {KERNEL}")
    print(f"{'frames':>8} {'numpy (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for n_frames in (100, 1000, 10000):
        root = rng.standard_normal((n_frames, 3))
        quats = quat.canonicalize(rng.standard_normal((n_frames, N_JOINTS, 4)))
        parents = np.asarray(skeleton.parents, dtype=np.int64)
        args = (root, quats, parents, skeleton.offsets)
        t_np = bench(fk_numpy, *args)
        if fk_cython is None:
            print(f"{n_frames:>8} {t_np * 1e3:>12.3f} {'n/a':>12} {'n/a':>8}")
            continue
        t_cy = bench(fk_cython, *args)
        np.testing.assert_allclose(fk_numpy(*args), fk_cython(*args), atol=1e-12)
        print(f"{n_frames:>8} {t_np * 1e3:>12.3f} {t_cy * 1e3:>12.3f} {t_np / t_cy:>8.2f}x")


if __name__ == "__main__":
    main()
