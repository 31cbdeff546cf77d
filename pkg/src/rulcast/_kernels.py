"""Monte-Carlo first-passage kernels.

The per-path loop (severity-modulated Euler steps until the threshold is hit)
dominates the runtime of the simulation-based predictor, so it is compiled
with numba when available.  A pure-numpy fallback with identical semantics is
selected by setting RULCAST_BACKEND=numpy; RULCAST_BACKEND=numba forces the
compiled path and raises if numba is missing.

Each path's noise stream is a pure function of its own seed, so results do
not depend on thread count or scheduling.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

ENV_VAR = "RULCAST_BACKEND"


def active_backend() -> str:
    """Resolve the kernel backend from the environment ('numba' or 'numpy')."""
    choice = os.environ.get(ENV_VAR, "auto").lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("RULCAST_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if HAVE_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    if HAVE_NUMBA and n >= 1:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _mc_kernel_numba(
        seeds, alphas, betas, gamma, a0, threshold, dt, n_steps, psi_flat, end_flat, offsets
    ):  # pragma: no cover - exercised via dispatcher
        m_total = seeds.shape[0]
        out = np.empty(m_total)
        sq = np.sqrt(dt)
        for m in prange(m_total):
            np.random.seed(seeds[m])
            a = a0
            if a >= threshold:
                out[m] = 0.0
                continue
            alpha = alphas[m]
            beta = betas[m]
            si = offsets[m]
            si_end = offsets[m + 1]
            t = 0.0
            res = np.inf
            for _ in range(n_steps):
                t1 = t + dt
                e = 0.0
                tt = t
                while si + 1 < si_end and end_flat[si] < t1:
                    e += psi_flat[si] * (end_flat[si] - tt)
                    tt = end_flat[si]
                    si += 1
                e += psi_flat[si] * (t1 - tt)
                a_new = a + alpha * e + beta * dt + gamma * sq * np.random.normal(0.0, 1.0)
                if a_new >= threshold:
                    res = t + dt * (threshold - a) / (a_new - a)
                    break
                a = a_new
                t = t1
            out[m] = res
        return out


def _path_numpy(rng, alpha, beta, gamma, a0, threshold, dt, n_steps, psi, ends):
    if a0 >= threshold:
        return 0.0
    knots = np.empty(ends.size + 1)
    knots[0] = 0.0
    knots[1:] = ends
    cum = np.empty_like(knots)
    cum[0] = 0.0
    np.cumsum(psi * np.diff(knots), out=cum[1:])
    sq_noise = gamma * np.sqrt(dt)
    a = a0
    idx = 0
    block = 4096
    while idx < n_steps:
        nb = min(block, n_steps - idx)
        grid = dt * np.arange(idx, idx + nb + 1)
        e_cum = np.interp(grid, knots, cum)
        inc = alpha * np.diff(e_cum) + beta * dt + sq_noise * rng.standard_normal(nb)
        vals = a + np.cumsum(inc)
        above = vals >= threshold
        if above.any():
            k = int(np.argmax(above))
            a_prev = a if k == 0 else vals[k - 1]
            return dt * (idx + k) + dt * (threshold - a_prev) / (vals[k] - a_prev)
        a = vals[-1]
        idx += nb
    return np.inf


def mc_first_passage(
    seeds: np.ndarray,
    alphas: np.ndarray,
    betas: np.ndarray,
    gamma: float,
    a0: float,
    threshold: float,
    dt: float,
    n_steps: int,
    psi_flat: np.ndarray,
    end_flat: np.ndarray,
    offsets: np.ndarray,
    backend: str | None = None,
) -> np.ndarray:
    """First-passage time per path; np.inf marks paths censored at the horizon.

    Path m uses severity segments psi_flat/end_flat[offsets[m]:offsets[m+1]]
    (end times relative to the prediction start; the last segment must cover
    n_steps * dt) and drift parameters alphas[m], betas[m].
    """
    backend = backend or active_backend()
    seeds = np.ascontiguousarray(seeds, dtype=np.int64)
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    psi_flat = np.ascontiguousarray(psi_flat, dtype=np.float64)
    end_flat = np.ascontiguousarray(end_flat, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    horizon = n_steps * dt
    seg_last = end_flat[offsets[1:] - 1]
    if np.any(seg_last < horizon - 1e-9 * max(1.0, horizon)):
        raise ValueError("severity segments do not cover the simulation horizon")
    if backend == "numba":
        return _mc_kernel_numba(
            seeds, alphas, betas, float(gamma), float(a0), float(threshold),
            float(dt), int(n_steps), psi_flat, end_flat, offsets,
        )
    out = np.empty(seeds.size)
    for m in range(seeds.size):
        rng = np.random.default_rng(int(seeds[m]))
        out[m] = _path_numpy(
            rng, alphas[m], betas[m], gamma, a0, threshold, dt, n_steps,
            psi_flat[offsets[m]:offsets[m + 1]],
            end_flat[offsets[m]:offsets[m + 1]],
        )
    return out
