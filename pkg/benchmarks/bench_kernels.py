"""Time the compiled and numpy kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fscbound import kernels
from fscbound.exact import score_shifts
from fscbound.specialfn import log_binomial_row


def workloads(rng):
    n_g, n_b = 300, 200
    shifts = score_shifts(n_g, 2.09)
    size = int(shifts[-1]) + n_b + 1
    score_args = (log_binomial_row(n_g), log_binomial_row(n_b), shifts, size)

    t, n, m = 2048, 16, 16
    u_init, u_trans = rng.random(t), rng.random((t, n))
    chain_args = (u_init, u_trans, 0.1, 0.2, 2 / 3, kernels.INIT_STATIONARY)
    states = kernels.sample_chains(*chain_args)
    codebooks = rng.integers(0, 2, size=(t, m, n), dtype=np.uint8)
    good = score_shifts(n, 2.09)
    decode_args = (codebooks, rng.random((t, n)), states, 0.05, 0.2, good, True, rng.random(t))
    return {
        "accumulate_scores": score_args,
        "sample_chains": chain_args,
        "decode_batch": decode_args,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    jobs = workloads(np.random.default_rng(0))
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name in backends) + "   speedup")
    for kernel, call_args in jobs.items():
        times = {}
        for name, mod in backends.items():
            fn = getattr(mod, kernel)
            times[name] = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat))
        row = f"{kernel:<20}" + "".join(f"{times[n] * 1e3:>11.2f} ms" for n in backends)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:.1f}x"
        print(row)


if __name__ == "__main__":
    main()
