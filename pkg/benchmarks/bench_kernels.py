"""Time the SPOG decoder with the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--n 10000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from noisygt import NoisyChannel, apply_noise, kernels, sample_ground_truth, spog, true_results


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    ch = NoisyChannel(args.noise, args.noise)
    rng = np.random.default_rng(0)
    sd = spog.build_design(args.n, spog.default_params(args.alpha, ch, 0.5), ch, rng)
    sigma = sample_ground_truth(args.n, args.alpha, rng)
    observed = apply_noise(true_results(sd.design, sigma), ch, rng)
    print(f"n={args.n} tests={sd.m} gamma={sd.params.gamma}")

    results = {}
    for name in sorted(kernels.BACKENDS):
        t = best_time(lambda: spog.decode(sd, observed, ch, backend=name), args.repeat)
        results[name] = (t, spog.decode(sd, observed, ch, backend=name))
        print(f"{name:>7}: {t * 1e3:9.1f} ms")
    if len(results) == 2:
        (tc, ec), (tp, ep) = results["cython"], results["python"]
        print(f"speedup: {tp / tc:.1f}x, outputs identical: {np.array_equal(ec, ep)}")
    else:
        print("compiled kernels not built; only the pure-Python backend ran")


if __name__ == "__main__":
    main()
