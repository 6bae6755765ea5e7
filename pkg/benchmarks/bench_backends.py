"""Time the numba and numpy integrator backends on the reference echo.

    python3 benchmarks/bench_backends.py --classes 1 21 101 --repeats 3
"""

import argparse
import time

import numpy as np

from bloch_rephase import _kernels
from bloch_rephase.ensemble import EnsembleSpec
from bloch_rephase.oracle import ensemble_evolve
from bloch_rephase.seqfile import load_sequence, shipped_example
from bloch_rephase.units import mhz


def run(seq, n, tol):
    ens = EnsembleSpec("gaussian", mhz(0.5), n)
    return ensemble_evolve(seq, ens, (1.0, 0.0, 0.0), tol=tol, samples=2).class_finals


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--classes", type=int, nargs="+", default=[1, 21, 101])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args(argv)

    seq = load_sequence(shipped_example())
    backends = _kernels.available_backends()
    if "numba" in backends:
        prev = _kernels.set_backend("numba")
        run(seq, 1, args.tol)  # compile outside the timed region
        _kernels.set_backend(prev)

    print(f"{'classes':>8}" + "".join(f"{b + ' [s]':>14}" for b in backends) + f"{'speedup':>10}{'max |diff|':>13}")
    for n in args.classes:
        times, outs = {}, {}
        for b in backends:
            prev = _kernels.set_backend(b)
            try:
                times[b], outs[b] = best_of(lambda: run(seq, n, args.tol), args.repeats)
            finally:
                _kernels.set_backend(prev)
        line = f"{n:>8}" + "".join(f"{times[b]:>14.3f}" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(outs["numba"] - outs["numpy"])))
            line += f"{times['numpy'] / times['numba']:>10.1f}{diff:>13.2e}"
        print(line)


if __name__ == "__main__":
    main()
