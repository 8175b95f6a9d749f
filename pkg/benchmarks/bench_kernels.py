"""Time the estimator kernels: compiled extension vs pure-Python fallback.

Generates a synthetic counting-process panel and measures repeated
(loglik, gradient, information) evaluations for the Cox and piecewise
kernels through both backends. Run from a checkout or an install:

    python benchmarks/bench_kernels.py --rows 20000 --covariates 8
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from commitgate._core import _purepy

try:
    from commitgate._core import _speedups
except ImportError:
    _speedups = None


def synthetic_panel(rows: int, covs: int, seed: int = 20) -> dict:
    rng = np.random.default_rng(seed)
    n_dev = max(1, rows // 12)
    start, stop, event = [], [], []
    for _ in range(n_dev):
        months = int(rng.integers(1, 24))
        immigrated = rng.uniform() < 0.3
        for i in range(months):
            start.append(float(i))
            stop.append(float(i + 1))
            event.append(1.0 if immigrated and i == months - 1 else 0.0)
    start = np.array(start[:rows])
    stop = np.array(stop[:rows])
    event = np.array(event[:rows])
    x = rng.normal(size=(len(start), covs))
    beta = rng.normal(scale=0.2, size=covs)
    cuts = np.array([6.0, 12.0, float(stop.max())])
    interval = np.minimum(np.searchsorted(cuts, stop, side="left"), len(cuts) - 1)
    return {
        "start": start,
        "stop": stop,
        "event": event,
        "x": x,
        "eta": x @ beta,
        "exposure": stop - start,
        "interval": interval.astype(np.int64),
        "a": np.full(len(cuts), -2.0),
        "beta": beta,
    }


def time_call(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--covariates", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    data = synthetic_panel(args.rows, args.covariates)
    cox_args = (data["start"], data["stop"], data["event"], data["x"], data["eta"], True)
    pwe_args = (
        data["exposure"],
        data["event"],
        data["interval"],
        data["x"],
        data["a"],
        data["beta"],
    )

    backends = [("pure-python", _purepy)]
    if _speedups is not None:
        backends.append(("compiled", _speedups))
    else:
        print("compiled backend not available; timing pure-python only")

    n = len(data["start"])
    print(f"{n} rows, {args.covariates} covariates, best of {args.repeats}")
    results = {}
    for label, mod in backends:
        cox_t = time_call(mod.cox_loglik_grad_info, cox_args, args.repeats)
        pwe_t = time_call(mod.pwe_loglik_grad_info, pwe_args, args.repeats)
        results[label] = (cox_t, pwe_t)
        print(f"{label:>12}  cox {cox_t * 1e3:8.2f} ms   pwe {pwe_t * 1e3:8.2f} ms")
    if len(results) == 2:
        cox_speedup = results["pure-python"][0] / results["compiled"][0]
        pwe_speedup = results["pure-python"][1] / results["compiled"][1]
        print(f"{'speedup':>12}  cox {cox_speedup:8.2f} x    pwe {pwe_speedup:8.2f} x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
