"""Time the compiled trial kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py --trials 100000 --repeat 3

Both backends run the same scenario, seed and trial range; the script also
reports the largest relative SNR difference and whether the selected blocks
match.
"""

import argparse
import time

import numpy as np

from ris_outage import kernels
from ris_outage.montecarlo import simulate_snr
from ris_outage.sweep import load_preset


def bench(scn, trials, seed, backend, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = simulate_snr(scn, trials, seed, workers=1, backend=backend, return_selected=True)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="fig2", help="scenario taken from this preset")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--fail-prob", type=float, nargs="+", default=[0.0, 0.5])
    args = ap.parse_args(argv)

    base = load_preset(args.preset).scenario
    have = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(have)} (default {kernels.BACKEND})")
    print(f"scenario: {base.n_paths} blocks x {base.m_prime} elements, {args.trials} trials, best of {args.repeat}")
    print(f"{'p':>5} {'backend':>8} {'seconds':>9} {'trials/s':>12} {'speedup':>8}")
    for p in args.fail_prob:
        scn = base.replace(fail_prob=p)
        res = {name: bench(scn, args.trials, args.seed, name, args.repeat) for name in have}
        ref = res["numpy"][0]
        for name in have:
            t = res[name][0]
            print(f"{p:5.2f} {name:>8} {t:9.3f} {args.trials / t:12.0f} {ref / t:7.1f}x")
        if "cython" in res:
            (a, sa), (b, sb) = res["numpy"][1], res["cython"][1]
            rel = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))
            print(f"      max rel SNR diff {rel:.1e}; selections identical: {bool(np.array_equal(sa, sb))}")


if __name__ == "__main__":
    main()
