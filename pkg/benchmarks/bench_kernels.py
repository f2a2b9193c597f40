"""Time the antenna-count scan with the numba kernel and the numpy fallback.

    python3 benchmarks/bench_kernels.py [--iterations 2000] [--ues 50,200] [--repeat 3]

Both backends run on identical inputs; the script checks that they agree
before reporting timings.
"""

import argparse
import time

import numpy as np

from beamopt.scenario import ScenarioConfig
from beamopt.solver import _codebook, _timing_row, block_inputs, required_passing
from beamopt import kernels


def bench(num_ues: int, iterations: int, n_cells: int, repeat: int):
    cfg = ScenarioConfig(num_ues=num_ues)
    states, phi, d2, a, b = block_inputs(cfg, 0, iterations)
    delta, s_d = _codebook(64)
    speeds = np.linspace(1.0, 10.0, n_cells)
    t_bm = np.stack([_timing_row(cfg.n_ss, 40e-3, cfg.numerology, 64)[0]] * n_cells)
    args = (states, phi, d2, a, b, speeds, t_bm, delta, s_d, cfg.max_tx_power_w, cfg.snr_threshold,
            required_passing(num_ues, cfg.misdetection_prob), False)
    kernels.scan_cells(*[x[:1] if isinstance(x, np.ndarray) and x.shape[:1] == (iterations,) else x for x in args],
                       use_jit=True)  # compile outside the timed region
    out = {}
    results = {}
    for use_jit in (True, False):
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            results[use_jit] = kernels.scan_cells(*args, use_jit=use_jit)
            best = min(best, time.perf_counter() - t0)
        out["numba" if use_jit else "numpy"] = best
    np.testing.assert_array_equal(results[True][0], results[False][0])
    np.testing.assert_allclose(results[True][1], results[False][1], rtol=1e-12, equal_nan=True)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iterations", type=int, default=2000)
    parser.add_argument("--ues", default="50,200")
    parser.add_argument("--cells", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'K':>6} {'cells':>6} {'iters':>7} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for k in (int(x) for x in args.ues.split(",")):
        t = bench(k, args.iterations, args.cells, args.repeat)
        print(f"{k:>6} {args.cells:>6} {args.iterations:>7} {t['numba']:>10.4f} {t['numpy']:>10.4f} "
              f"{t['numpy'] / t['numba']:>8.1f}x")


if __name__ == "__main__":
    main()
