"""Throughput of the compiled kernels against the numpy fallback.

    python benchmarks/bench_backends.py --width 128 --samples 200000

Both backends generate the same networks; the script checks that the
outputs agree before reporting timings.
"""

import argparse
import time

import numpy as np

from finitewidth.config import EnsembleSpec, InitScheme, NetworkConfig
from finitewidth.sampler import available_backends, run_ensemble


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--activation", default="relu")
    p.add_argument("--init", default="glorot_uniform")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()

    init = InitScheme.parse(args.init)
    spec = EnsembleSpec(NetworkConfig(args.width, args.activation, init, init), 1.0, args.samples, 0)
    results = {}
    for backend in available_backends():
        secs, summary = best_of(args.repeats, lambda: run_ensemble(spec, workers=args.threads, backend=backend))
        results[backend] = (secs, summary)
        rate = args.samples / secs
        print(f"{backend:>9}: {secs:8.3f} s  {rate:12.0f} networks/s  {rate * args.width:14.0f} units/s")

    if len(results) == 2:
        (tc, sc), (tp, sp) = results["compiled"], results["python"]
        same = np.array_equal(sc.ecdf.counts, sp.ecdf.counts)
        var_c = sc.moments.finalize().variance
        var_p = sp.moments.finalize().variance
        print(f"speedup: {tp / tc:.1f}x   identical histograms: {same}   "
              f"variance rel diff: {abs(var_c - var_p) / var_c:.1e}")
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
