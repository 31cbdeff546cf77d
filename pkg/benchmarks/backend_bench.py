"""Compare the compiled and pure-numpy Monte-Carlo kernels.

Runs the simulation-based predictor on the same inputs under both backends
(RULCAST_BACKEND=numba / numpy) and prints wall-clock times per M, plus the
closed-form route for scale.

Usage: python3 benchmarks/backend_bench.py [--M 1000 --M 10000] [--seed 7]
"""

import argparse
import os
import time

import numpy as np

from rulcast._kernels import ENV_VAR, HAVE_NUMBA
from rulcast.bayes import CtmcStats, PosteriorState
from rulcast.ctmc import TaskSeverityModel, stationary_distribution
from rulcast.rld import effective_rate, rld_approach1, rld_approach2, rul_median


def build_inputs():
    model = TaskSeverityModel(
        ("light", "heavy"), [[-1.0, 1.0], [2.0, -2.0]], {"light": 1.0, "heavy": 5.0}
    )
    posterior = PosteriorState(
        mean=np.array([0.1, 0.05]),
        covariance=np.diag([1e-4, 1e-4]),
        gamma=0.2,
        ctmc_stats=CtmcStats(
            model.states, np.array([[0.0, 30.0], [30.0, 0.0]]), np.array([30.0, 15.0])
        ),
    )
    return model, posterior


def time_backend(backend, model, posterior, m, horizon, seed):
    os.environ[ENV_VAR] = backend
    try:
        # warm-up absorbs jit compilation and caches
        rld_approach2(0.0, 6.0, posterior, model, "light", 16, horizon, seed)
        start = time.perf_counter()
        emp = rld_approach2(0.0, 6.0, posterior, model, "light", m, horizon, seed)
        elapsed = time.perf_counter() - start
    finally:
        os.environ.pop(ENV_VAR, None)
    return elapsed, emp


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--M", dest="m_values", action="append", type=int, default=None)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    m_values = args.m_values or [1000, 10_000]

    model, posterior = build_inputs()
    pi = stationary_distribution(model)
    rate = effective_rate(posterior.mean, pi, model.severity_vector())
    closed = rld_approach1(0.0, 6.0, rate, posterior.gamma)
    horizon = 10.0 * closed.distribution.mean

    reps = 200
    start = time.perf_counter()
    for _ in range(reps):
        c = rld_approach1(0.0, 6.0, rate, posterior.gamma)
        rul_median(c)
    t_closed = (time.perf_counter() - start) / reps
    print(f"closed form: {t_closed * 1e6:8.1f} us per call")

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'M':>8}  " + "".join(f"{b:>12}" for b in backends) + f"{'ratio':>10}")
    for m in m_values:
        times = {}
        for backend in backends:
            elapsed, emp = time_backend(backend, model, posterior, m, horizon, args.seed)
            times[backend] = elapsed
        row = f"{m:>8}  " + "".join(f"{times[b]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
