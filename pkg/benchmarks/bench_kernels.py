"""Compare the compiled kernels with the NumPy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--skip-sweep]

Times each batched kernel on identical inputs, checks that the two
backends agree, and times a 64x64 temperature/frequency sweep with each
backend forced through ``PONDEROMOTIVE_PURE_PYTHON``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ponderomotive import _kernels
from ponderomotive.gaussian import random_physical_cm
from ponderomotive.model import SimConfig, _optics, build_transfer, mech_susceptibility

SWEEP = (
    "from ponderomotive.model import SimConfig;"
    "from ponderomotive.sweep import SweepAxis, run_sweep;"
    "run_sweep(SimConfig(), [SweepAxis('temperature', 'log', 1, 295, 64),"
    " SweepAxis('frequency', 'log', 1e3, 1e5, 64)])"
)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(n_states, n_freq):
    rng = np.random.default_rng(0)
    mats = np.stack([random_physical_cm(rng).entries for _ in range(min(n_states, 2000))])
    mats = np.ascontiguousarray(np.resize(mats, (n_states, 4, 4)))
    cfg = SimConfig()
    w = 2 * np.pi * np.geomspace(10, 1e6, n_freq)
    opt = _optics(cfg)
    inv = 1 / mech_susceptibility(cfg.modes, w)
    targs = (w, inv, opt.lw.gamma_in, opt.lw.gamma_loss, opt.delta, opt.gx, opt.gf)
    tm = build_transfer(cfg, w)
    cargs = (tm.M, tm.v, tm.force_psd)
    return [
        (f"negativity_batch  N={n_states}", "negativity_batch", (mats,)),
        (f"transfer_batch    N={n_freq}", "transfer_batch", targs),
        (f"covariance_batch  N={n_freq}", "covariance_batch", cargs),
    ]


def agree(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    err = 0.0
    for x, y in zip(a, b):
        x, y = np.asarray(x), np.asarray(y)
        if x.dtype == bool:
            err = max(err, float(np.count_nonzero(x != y)))
            continue
        ok = np.isfinite(x) & np.isfinite(y)
        scale = max(float(np.max(np.abs(x[ok]))), 1e-300)
        err = max(err, float(np.max(np.abs(x[ok] - y[ok]))) / scale)
    return err


def sweep_time(pure):
    env = dict(os.environ, PONDEROMOTIVE_PURE_PYTHON="1" if pure else "0")
    code = f"import time; t = time.perf_counter(); {SWEEP}; print(time.perf_counter() - t)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--states", type=int, default=200_000)
    ap.add_argument("--freqs", type=int, default=20_000)
    ap.add_argument("--skip-sweep", action="store_true")
    args = ap.parse_args(argv)

    cy, py = _kernels.compiled_backend, _kernels.python_backend
    if cy is None:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'kernel':<32}{'python [ms]':>12}{'cython [ms]':>12}{'speedup':>9}{'max rel diff':>14}")
    for label, name, fargs in kernel_cases(args.states, args.freqs):
        fp, fc = getattr(py, name), getattr(cy, name)
        tp = best(lambda: fp(*fargs), args.repeat)
        tc = best(lambda: fc(*fargs), args.repeat)
        diff = agree(fp(*fargs), fc(*fargs))
        print(f"{label:<32}{tp * 1e3:>12.2f}{tc * 1e3:>12.2f}{tp / tc:>8.1f}x{diff:>14.1e}")
    if not args.skip_sweep:
        tp, tc = sweep_time(True), sweep_time(False)
        print(f"{'sweep 64x64 (end to end)':<32}{tp * 1e3:>12.0f}{tc * 1e3:>12.0f}{tp / tc:>8.1f}x{'':>14}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
