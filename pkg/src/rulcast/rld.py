"""Remaining-lifetime distributions by two routes, plus what-if analysis.

Route 1 collapses the severity chain into an effective drift rate via its
stationary (or hypothesized) task proportions and returns a closed-form
inverse-Gaussian lifetime.  Route 2 simulates degradation paths under
posterior parameter draws and returns a censored empirical first-passage
sample.  A consistency check of the two routes and a runtime benchmark are
included.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bayes import ParameterDraws, PosteriorState, sample_parameters
from .ctmc import StationaryDistribution, TaskSeverityModel, is_ergodic, stationary_distribution
from .degradation import InverseGaussian

PI_SUM_TOL = 1e-10


class RldError(ValueError):
    pass


class DegenerateDriftError(RldError):
    """Effective drift is non-positive; the closed-form lifetime law is undefined."""


class HorizonTooShortError(RldError):
    """Too much censoring to identify the requested statistic."""


class ExcessiveCensoringError(RldError):
    """Censoring too heavy for the limit comparison to be meaningful."""


@dataclass(frozen=True)
class WhatIfScenario:
    """Hypothesized future task proportions over the severity states."""

    pi: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "pi", p)
        if np.any(p < 0):
            raise RldError("proportions must be nonnegative")
        if abs(p.sum() - 1.0) > PI_SUM_TOL:
            raise RldError(f"proportions sum to {p.sum():.12g}, not 1")


def _pi_vector(pi) -> np.ndarray:
    if isinstance(pi, WhatIfScenario):
        return pi.pi
    if isinstance(pi, StationaryDistribution):
        return pi.probabilities
    return WhatIfScenario(np.asarray(pi, dtype=float)).pi


def effective_rate(posterior_mean, pi, psi) -> float:
    """mu_alpha * sum(pi_i * psi_i) + mu_beta; must be positive to be usable."""
    mu_alpha, mu_beta = float(posterior_mean[0]), float(posterior_mean[1])
    p = _pi_vector(pi)
    psi = np.asarray(psi, dtype=float)
    if p.size != psi.size:
        raise RldError("proportion vector and severity vector differ in length")
    rate = mu_alpha * float(p @ psi) + mu_beta
    return rate


@dataclass(frozen=True)
class RldClosedForm:
    """Closed-form lifetime: an inverse-Gaussian plus the quantities it came from."""

    distribution: InverseGaussian
    effective_rate: float
    residual_barrier: float

    def to_json(self, median_hours: float | None = None,
                median_cycles: float | None = None) -> str:
        doc = {
            "approach": 1,
            "ig": {"mean": self.distribution.mean, "shape": self.distribution.shape},
            "effective_rate": self.effective_rate,
            "residual_barrier": self.residual_barrier,
        }
        if median_hours is not None:
            doc["median_hours"] = median_hours
        if median_cycles is not None:
            doc["median_cycles"] = median_cycles
        return json.dumps(doc, indent=2)


@dataclass(frozen=True)
class RldEmpirical:
    """Censored empirical first-passage sample from the Monte-Carlo route."""

    failure_times: np.ndarray  # sorted, all <= horizon
    censored_count: int
    horizon: float
    m_total: int

    def __post_init__(self):
        ft = np.sort(np.asarray(self.failure_times, dtype=float))
        object.__setattr__(self, "failure_times", ft)
        if ft.size + self.censored_count != self.m_total:
            raise RldError("failure count plus censored count must equal M")
        if ft.size and ft[-1] > self.horizon + 1e-9:
            raise RldError("failure times must not exceed the horizon")

    @property
    def failure_fraction(self) -> float:
        return self.failure_times.size / self.m_total

    def cdf(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        counts = np.searchsorted(self.failure_times, t, side="right")
        out = counts / self.m_total
        return out if out.ndim else float(out)

    def to_json(self) -> str:
        return json.dumps(
            {
                "approach": 2,
                "failure_times": self.failure_times.tolist(),
                "censored": int(self.censored_count),
                "horizon": self.horizon,
                "m_total": self.m_total,
            }
        )


def rld_approach1(a_ck: float, threshold: float, rate: float, gamma: float) -> RldClosedForm:
    """Inverse-Gaussian lifetime from the effective degradation rate."""
    if a_ck >= threshold:
        raise RldError("accuracy already at or beyond the failure threshold")
    if rate <= 0:
        raise DegenerateDriftError(
            f"effective rate {rate:.6g} is not positive; closed-form lifetime undefined"
        )
    if gamma <= 0:
        raise RldError("gamma must be positive")
    barrier = threshold - a_ck
    dist = InverseGaussian(mean=barrier / rate, shape=barrier ** 2 / gamma ** 2)
    return RldClosedForm(dist, rate, barrier)


def default_dt(a_ck: float, threshold: float, rate: float) -> float:
    """Step size bounding first-passage discretization bias to ~0.1% of the mean life."""
    if rate <= 0:
        raise DegenerateDriftError("cannot derive a default dt from a non-positive rate")
    return (threshold - a_ck) / (1000.0 * rate)


def _severity_segments(rng, q: np.ndarray, psi: np.ndarray, i0: int, horizon: float):
    """One severity path as (psi per segment, segment end time), covering horizon."""
    psis: list[float] = []
    ends: list[float] = []
    i = i0
    t = 0.0
    n = q.shape[0]
    while t < horizon:
        rate = -q[i, i]
        # a rate too small to plausibly fire within the horizon is absorbing;
        # this also keeps 1/rate from overflowing on extreme posterior draws
        if rate * horizon <= 1e-12:
            psis.append(psi[i])
            ends.append(horizon)
            break
        t += rng.exponential(1.0 / rate)
        psis.append(psi[i])
        ends.append(t)
        if t >= horizon:
            break
        u = rng.random() * rate
        acc = 0.0
        nxt = -1
        for j in range(n):
            if j == i:
                continue
            acc += q[i, j]
            nxt = j
            if u <= acc:
                break
        i = nxt
    return np.array(psis), np.array(ends)


def _mean_rate_guess(draws: ParameterDraws, posterior: PosteriorState,
                     model: TaskSeverityModel) -> float:
    psi = model.severity_vector()
    if is_ergodic(model):
        pi = stationary_distribution(model).probabilities
    else:
        pi = np.full(model.n_states, 1.0 / model.n_states)
    return float(posterior.mean[0] * pi @ psi + posterior.mean[1])


def rld_approach2(
    a_ck: float,
    threshold: float,
    posterior: PosteriorState,
    model: TaskSeverityModel,
    current_state: str,
    m_total: int,
    horizon: float,
    rng_seed,
    dt: float | None = None,
    jobs: int | None = None,
) -> RldEmpirical:
    """Monte-Carlo lifetime: posterior draws, severity paths, first passages.

    Each path's severity realization and noise stream depend only on
    (rng_seed, path index), so the result is independent of thread count.
    Paths not failed within the horizon are censored.  The horizon is
    approached adaptively (short trial horizons first) so that paths failing
    early never pay for the full horizon.
    """
    if m_total < 1:
        raise RldError("M must be at least 1")
    if horizon <= 0:
        raise RldError("horizon must be positive")
    if a_ck >= threshold:
        raise RldError("accuracy already at or beyond the failure threshold")
    if jobs is not None:
        _kernels.set_num_threads(jobs)

    i0 = model.state_index(current_state)
    psi = model.severity_vector()
    root = np.random.SeedSequence(rng_seed)
    param_seed, sev_base, noise_base = root.spawn(3)
    noise_seeds = noise_base.generate_state(m_total, dtype=np.uint32).astype(np.int64)
    sev_words = sev_base.generate_state(m_total, dtype=np.uint32)

    draws = sample_parameters(posterior, m_total, param_seed)
    if dt is None:
        rate_guess = _mean_rate_guess(draws, posterior, model)
        dt = default_dt(a_ck, threshold, rate_guess)
        h_try = min(horizon, 8.0 * (threshold - a_ck) / rate_guess)
    else:
        h_try = horizon
    if dt <= 0:
        raise RldError("dt must be positive")

    result = np.full(m_total, np.inf)
    active = np.arange(m_total)
    while active.size:
        n_steps = int(np.ceil(h_try / dt - 1e-9))
        sev_psis, sev_ends, offsets = [], [], [0]
        for m in active:
            rng = np.random.default_rng(int(sev_words[m]))
            p, e = _severity_segments(rng, draws.generators[m], psi, i0, n_steps * dt)
            sev_psis.append(p)
            sev_ends.append(e)
            offsets.append(offsets[-1] + p.size)
        times = _kernels.mc_first_passage(
            noise_seeds[active],
            draws.alphas[active],
            draws.betas[active],
            posterior.gamma,
            a_ck,
            threshold,
            dt,
            n_steps,
            np.concatenate(sev_psis),
            np.concatenate(sev_ends),
            np.array(offsets, dtype=np.int64),
        )
        failed = np.isfinite(times)
        result[active[failed]] = times[failed]
        if h_try >= horizon:
            break
        active = active[~failed]
        h_try = min(horizon, 8.0 * h_try)

    failures = result[np.isfinite(result)]
    return RldEmpirical(
        failure_times=np.sort(failures),
        censored_count=int(m_total - failures.size),
        horizon=float(horizon),
        m_total=int(m_total),
    )


@dataclass(frozen=True)
class MedianRul:
    """Median remaining life, in hours and (when convertible) operational cycles."""

    hours: float
    cycles: float | None = None


def rul_median(
    rld: RldClosedForm | RldEmpirical,
    mean_epoch_hours: float | None = None,
    cycles_per_epoch: int | None = None,
) -> MedianRul:
    """Median of the lifetime law; cycles = hours / mean epoch duration * n_c."""
    if isinstance(rld, RldClosedForm):
        hours = rld.distribution.quantile(0.5)
    else:
        if rld.failure_fraction < 0.5:
            raise HorizonTooShortError(
                f"only {rld.failure_fraction:.1%} of paths failed; median is censored"
            )
        ft = rld.failure_times
        m = rld.m_total
        if m % 2 == 1:
            hours = float(ft[m // 2])
        else:
            hours = float(0.5 * (ft[m // 2 - 1] + ft[m // 2]))
    cycles = None
    if mean_epoch_hours is not None and cycles_per_epoch is not None:
        if mean_epoch_hours <= 0:
            raise RldError("mean epoch duration must be positive")
        cycles = hours / mean_epoch_hours * cycles_per_epoch
    return MedianRul(hours=hours, cycles=cycles)


@dataclass(frozen=True)
class WhatIfRow:
    pi: tuple[float, ...]
    median_hours: float
    median_cycles: float | None
    ig_mean: float
    ig_shape: float


def whatif(
    posterior: PosteriorState,
    a_ck: float,
    threshold: float,
    scenarios,
    psi,
    gamma: float | None = None,
    mean_epoch_hours: float | None = None,
    cycles_per_epoch: int | None = None,
) -> list[WhatIfRow]:
    """Closed-form predicted lifetime for each hypothesized task-proportion vector."""
    scenarios = list(scenarios)
    if not scenarios:
        raise RldError("at least one scenario is required")
    gamma = posterior.gamma if gamma is None else gamma
    rows = []
    for sc in scenarios:
        p = _pi_vector(sc)
        rate = effective_rate(posterior.mean, p, psi)
        closed = rld_approach1(a_ck, threshold, rate, gamma)
        med = rul_median(closed, mean_epoch_hours, cycles_per_epoch)
        rows.append(
            WhatIfRow(
                pi=tuple(float(x) for x in p),
                median_hours=med.hours,
                median_cycles=med.cycles,
                ig_mean=closed.distribution.mean,
                ig_shape=closed.distribution.shape,
            )
        )
    return rows


def whatif_to_csv(rows: list[WhatIfRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pi", "median_cycles", "median_hours", "ig_mean", "ig_shape"])
        for r in rows:
            writer.writerow(
                [
                    ",".join(repr(x) for x in r.pi),
                    "" if r.median_cycles is None else repr(r.median_cycles),
                    repr(r.median_hours),
                    repr(r.ig_mean),
                    repr(r.ig_shape),
                ]
            )


@dataclass(frozen=True)
class Lemma1Report:
    """Comparison of the closed-form expected life against the Monte-Carlo mean."""

    expected_t1: float
    mean_t2: float
    standard_error: float
    jensen_gap: float
    failure_fraction: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "expected_t1": self.expected_t1,
                "mean_t2": self.mean_t2,
                "standard_error": self.standard_error,
                "jensen_gap": self.jensen_gap,
                "failure_fraction": self.failure_fraction,
                "passed": self.passed,
            },
            indent=2,
        )


def lemma1_check(
    posterior: PosteriorState,
    model: TaskSeverityModel,
    current_state: str,
    a_ck: float,
    threshold: float,
    m_total: int,
    horizon_multiplier: float,
    rng_seed,
    dt: float | None = None,
) -> Lemma1Report:
    """Check that the closed-form expected life lower-bounds the Monte-Carlo mean.

    Jensen's inequality on the averaged drift makes the effective-rate life a
    conservative bound; pass iff mean(T2) >= E[T1] - 2 * SE(T2) with
    near-complete failure coverage.
    """
    if m_total < 5000:
        raise RldError("at least 5000 sample paths are required")
    if horizon_multiplier < 20:
        raise RldError("horizon must be at least 20 expected lifetimes")
    pi = stationary_distribution(model)
    rate = effective_rate(posterior.mean, pi, model.severity_vector())
    closed = rld_approach1(a_ck, threshold, rate, posterior.gamma)
    expected_t1 = closed.distribution.mean
    horizon = horizon_multiplier * expected_t1
    emp = rld_approach2(
        a_ck, threshold, posterior, model, current_state, m_total, horizon, rng_seed, dt=dt
    )
    if emp.failure_fraction < 0.999:
        raise ExcessiveCensoringError(
            f"failure fraction {emp.failure_fraction:.4f} below 0.999; "
            "horizon too short to approximate the limit"
        )
    ft = emp.failure_times
    mean_t2 = float(ft.mean())
    se = float(ft.std(ddof=1) / np.sqrt(ft.size))
    return Lemma1Report(
        expected_t1=float(expected_t1),
        mean_t2=mean_t2,
        standard_error=se,
        jensen_gap=float(mean_t2 - expected_t1),
        failure_fraction=float(emp.failure_fraction),
        passed=bool(mean_t2 >= expected_t1 - 2.0 * se),
    )


@dataclass(frozen=True)
class BenchmarkReport:
    m_grid: tuple[int, ...]
    approach1_seconds: tuple[float, ...]
    approach2_seconds: tuple[float, ...]
    speedups: tuple[float, ...]
    backend: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "m_grid": list(self.m_grid),
                "approach1_seconds": list(self.approach1_seconds),
                "approach2_seconds": list(self.approach2_seconds),
                "speedups": list(self.speedups),
                "backend": self.backend,
            },
            indent=2,
        )


def benchmark(
    posterior: PosteriorState,
    model: TaskSeverityModel,
    current_state: str,
    a_ck: float,
    threshold: float,
    m_grid,
    rng_seed,
    horizon_multiplier: float = 10.0,
    dt: float | None = None,
) -> BenchmarkReport:
    """Wall-clock comparison of the closed-form and Monte-Carlo routes."""
    m_grid = tuple(int(m) for m in m_grid)
    if not m_grid:
        raise RldError("M grid must be non-empty")
    pi = stationary_distribution(model)
    psi = model.severity_vector()
    rate = effective_rate(posterior.mean, pi, psi)
    closed = rld_approach1(a_ck, threshold, rate, posterior.gamma)
    horizon = horizon_multiplier * closed.distribution.mean

    # warm-up so jit compilation is not billed to the first grid point
    rld_approach2(a_ck, threshold, posterior, model, current_state,
                  min(m_grid[0], 16), horizon, rng_seed, dt=dt)

    t1_times, t2_times, speedups = [], [], []
    for m in m_grid:
        reps = 200
        start = time.perf_counter()
        for _ in range(reps):
            c = rld_approach1(a_ck, threshold, rate, posterior.gamma)
            rul_median(c)
        t1 = (time.perf_counter() - start) / reps

        start = time.perf_counter()
        rld_approach2(a_ck, threshold, posterior, model, current_state, m,
                      horizon, rng_seed, dt=dt)
        t2 = time.perf_counter() - start
        t1_times.append(t1)
        t2_times.append(t2)
        speedups.append(t2 / t1 if t1 > 0 else float("inf"))
    return BenchmarkReport(
        m_grid=m_grid,
        approach1_seconds=tuple(t1_times),
        approach2_seconds=tuple(t2_times),
        speedups=tuple(speedups),
        backend=_kernels.active_backend(),
    )
