"""Throughput comparison: compiled Mittag-Leffler core vs NumPy fallback.

Run:  python benchmarks/bench_ml.py
The workloads mirror real kernel builds: radial symbol tables (one call per
unique |xi|^2), the series regime, and the integral regime separately.
"""

import time

import numpy as np


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    from fracspde.specfun import _fallback

    try:
        from fracspde import _mlcore
    except ImportError:
        _mlcore = None
        print("compiled core not built; timing the fallback only\n")

    workloads = [
        ("series, 2k args in [-2, 0]", "series_eval",
         (0.7, 1.0, -np.linspace(0.0, 2.0, 2000))),
        ("series, 2k args, small order", "series_eval",
         (0.35, 0.8, -np.linspace(0.0, 1.5, 2000))),
        ("integral, 512 radial values", "integral_eval",
         (0.7, 1.0, np.geomspace(3.0, 1e4, 512))),
        ("integral, 512 values, order 1.6", "integral_eval",
         (1.6, 1.0, np.geomspace(3.0, 1e4, 512))),
        ("integral, near-degenerate order 1.9", "integral_eval",
         (1.9, 0.9, np.geomspace(3.0, 1e3, 128))),
    ]

    header = f"{'workload':40s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, fn_name, args in workloads:
        t_pure = _time(getattr(_fallback, fn_name), *args)
        if _mlcore is not None:
            t_comp = _time(getattr(_mlcore, fn_name), *args)
            a = np.atleast_1d(getattr(_fallback, fn_name)(*args))
            b = np.atleast_1d(getattr(_mlcore, fn_name)(*args))
            dev = float(np.max(np.abs(a - b)))
            print(f"{label:40s} {t_pure*1e3:8.2f}ms {t_comp*1e3:8.2f}ms "
                  f"{t_pure/t_comp:7.1f}x   (max dev {dev:.1e})")
        else:
            print(f"{label:40s} {t_pure*1e3:8.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
