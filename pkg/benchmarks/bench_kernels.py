"""Time the statevector kernels of both backends and one Grover iteration.

    python benchmarks/bench_kernels.py [--n-tot 12] [--repeat 200]
"""
import argparse
import math
import time
import timeit

import numpy as np

from gyrosim import _kernels_py, qstate
from gyrosim.circuit import compile_grover_iteration
from gyrosim.gyqec import GyqecConfig, run_with_gyqec
from gyrosim.imperfections import ErrorModel

try:
    from gyrosim import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def per_call(fn, repeat):
    # best of five batches, robust against a busy machine
    return min(timeit.repeat(fn, number=repeat, repeat=5)) / repeat


def kernel_calls(k, amps, n):
    c, s = math.cos(0.01), math.sin(0.01)
    h = 1 / math.sqrt(2)
    ii = np.arange(n, dtype=np.int64)
    jj = (ii + 1) % n
    cs, ss = np.full(n, c), np.full(n, s)
    return {
        "hadamard": lambda: k.apply_1q(amps, 3, h, h, h, -h),
        "cnot": lambda: k.apply_cnot(amps, 2, 5),
        "cphase": lambda: k.apply_cphase(amps, 1, 4, complex(c, s)),
        "swap": lambda: k.apply_swap(amps, 0, n - 1),
        "xx ring": lambda: k.apply_xx_many(amps, ii, jj, cs, ss),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-tot", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    n = args.n_tot
    rng = np.random.default_rng(0)
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    v /= np.linalg.norm(v)

    backends = [("numpy", _kernels_py)] + ([("cython", _kernels_c)] if _kernels_c else [])
    print(f"n_tot={n}  active backend: {qstate.BACKEND}")
    print("kernel\t" + "\t".join(f"{name} [us]" for name, _ in backends))
    timings = {name: {k: per_call(fn, args.repeat) for k, fn in kernel_calls(mod, v.copy(), n).items()}
               for name, mod in backends}
    for kernel in timings["numpy"]:
        print(kernel + "\t" + "\t".join(f"{timings[name][kernel] * 1e6:.1f}" for name, _ in backends))

    n_q = n - 1
    prog = compile_grover_iteration(n_q, 0)
    for label, model, gy in [
        ("ideal", ErrorModel(), GyqecConfig.disabled()),
        ("static", ErrorModel.static(n, 0.002, 1), GyqecConfig.disabled()),
        ("gyqec l_g=1", ErrorModel.static(n, 0.002, 1), GyqecConfig(1)),
    ]:
        t0 = time.perf_counter()
        run_with_gyqec(prog, 5, gy, model, 0)
        dt = (time.perf_counter() - t0) / 5
        print(f"iteration {label}: {dt * 1e3:.1f} ms ({prog.n_g} gates, {dt / prog.n_g * 1e6:.1f} us/gate)")


if __name__ == "__main__":
    main()
