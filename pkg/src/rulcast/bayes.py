"""Bayesian updating of the drift parameters at inspection epochs.

Between inspections the accuracy increment is Gaussian with mean
alpha * E + beta * dt (E = integrated severity over the interval) and
variance gamma^2 * dt, so a bivariate-normal prior on (alpha, beta) with
known gamma stays conjugate.  The severity chain gets a Gamma-Dirichlet
conjugate posterior on its transition counts and dwell times, which is what
the Monte-Carlo predictor draws its generator samples from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .ctmc import CtmcError, SeverityPath, TaskSeverityModel, integrated_severity

COV_SYM_TOL = 1e-12
GAMMA_HYPER_A = 1e-3
GAMMA_HYPER_B = 1e-3


class BayesError(ValueError):
    pass


@dataclass(frozen=True)
class InspectionLog:
    """Accuracy observations at cycle-count inspection epochs, plus the task history.

    Epoch k sits at cumulative cycle count c_k = k * cycles_per_epoch and
    wall-clock time times[k]; accuracy[0] is the initial accuracy A(0).
    """

    cycles: np.ndarray
    times: np.ndarray
    accuracy: np.ndarray
    task_history: SeverityPath
    cycles_per_epoch: int

    def __post_init__(self):
        cyc = np.asarray(self.cycles, dtype=float)
        t = np.asarray(self.times, dtype=float)
        a = np.asarray(self.accuracy, dtype=float)
        object.__setattr__(self, "cycles", cyc)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "accuracy", a)
        if not (cyc.size == t.size == a.size):
            raise BayesError("cycles, times, accuracy must have equal length")
        if cyc.size < 1:
            raise BayesError("log must contain at least the initial epoch")
        if self.cycles_per_epoch < 1:
            raise BayesError("cycles_per_epoch must be >= 1")
        if cyc.size > 1:
            dcyc = np.diff(cyc)
            if np.any(dcyc <= 0):
                raise BayesError("cycle counts must be strictly increasing")
            if np.any(np.abs(dcyc - self.cycles_per_epoch) > 1e-9):
                raise BayesError("cycle counts must advance by cycles_per_epoch")
            if np.any(np.diff(t) <= 0):
                raise BayesError("epoch times must be strictly increasing")
        if self.task_history.t_end < t[-1] - 1e-9:
            raise BayesError("task history must cover every inspection epoch")

    @property
    def n_epochs(self) -> int:
        return int(self.cycles.size)

    def increments(self, severity: dict[str, float], start_epoch: int = 1):
        """(delta_accuracy, integrated_severity, delta_t) per inter-inspection interval."""
        das, es, dts = [], [], []
        for k in range(max(1, start_epoch), self.n_epochs):
            t0, t1 = self.times[k - 1], self.times[k]
            if t1 <= t0:
                raise BayesError(f"non-positive interval at epoch {k}")
            das.append(self.accuracy[k] - self.accuracy[k - 1])
            es.append(integrated_severity(self.task_history, severity, t0, t1))
            dts.append(t1 - t0)
        return np.array(das), np.array(es), np.array(dts)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "cycles", "time", "accuracy"])
            for k in range(self.n_epochs):
                writer.writerow(
                    [k, int(self.cycles[k]), repr(float(self.times[k])),
                     repr(float(self.accuracy[k]))]
                )

    @classmethod
    def from_csv(cls, path, task_history: SeverityPath, cycles_per_epoch: int) -> "InspectionLog":
        import csv

        cycles, times, acc = [], [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                try:
                    cycles.append(float(row["cycles"]))
                    times.append(float(row["time"]))
                    acc.append(float(row["accuracy"]))
                except (KeyError, TypeError, ValueError) as exc:
                    raise BayesError(f"{path}: malformed row at line {lineno}: {exc}") from None
        return cls(np.array(cycles), np.array(times), np.array(acc),
                   task_history, cycles_per_epoch)


@dataclass(frozen=True)
class CtmcStats:
    """Sufficient statistics of the severity chain: transition counts and dwell times."""

    states: tuple[str, ...]
    counts: np.ndarray
    dwell: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        d = np.asarray(self.dwell, dtype=float)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "dwell", d)
        n = len(self.states)
        if c.shape != (n, n) or d.shape != (n,):
            raise BayesError("ctmc stats shapes do not match the state list")

    @classmethod
    def empty(cls, states: tuple[str, ...]) -> "CtmcStats":
        n = len(states)
        return cls(tuple(states), np.zeros((n, n)), np.zeros(n))

    def add_window(self, path: SeverityPath, t0: float, t1: float) -> "CtmcStats":
        """Stats over path restricted to (t0, t1]; jumps counted strictly inside."""
        index = {s: k for k, s in enumerate(self.states)}
        counts = self.counts.copy()
        dwell = self.dwell.copy()
        for k, s in enumerate(path.states):
            lo = max(path.start_times[k], t0)
            hi = min(path.end_times[k], t1)
            if hi > lo:
                dwell[index[s]] += hi - lo
            jump_t = path.end_times[k]
            if k + 1 < len(path.states) and t0 < jump_t <= t1:
                j = index[path.states[k + 1]]
                i = index[s]
                if i != j:
                    counts[i, j] += 1
        return CtmcStats(self.states, counts, dwell)


@dataclass(frozen=True)
class PosteriorState:
    """Gaussian belief over (alpha, beta), a fixed gamma, and the CTMC posterior stats."""

    mean: np.ndarray
    covariance: np.ndarray
    gamma: float
    ctmc_stats: CtmcStats
    epochs_seen: int = 1   # epoch 0 is the initial observation, no increment yet
    last_time: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float)
        v = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", v)
        if m.shape != (2,) or v.shape != (2, 2):
            raise BayesError("mean must be length 2 and covariance 2x2")
        if np.max(np.abs(v - v.T)) > COV_SYM_TOL:
            raise BayesError("covariance must be symmetric")
        if np.any(np.linalg.eigvalsh(v) <= 0):
            raise BayesError("covariance must be positive-definite")
        if self.gamma <= 0:
            raise BayesError("gamma must be positive")

    @classmethod
    def diffuse(
        cls,
        gamma: float,
        states: tuple[str, ...],
        prior_scale: float = 1e4,
        ctmc_stats: CtmcStats | None = None,
    ) -> "PosteriorState":
        return cls(
            mean=np.zeros(2),
            covariance=prior_scale * np.eye(2),
            gamma=gamma,
            ctmc_stats=ctmc_stats if ctmc_stats is not None else CtmcStats.empty(states),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "mean": self.mean.tolist(),
                "cov": self.covariance.tolist(),
                "gamma": self.gamma,
                "ctmc_stats": {
                    "states": list(self.ctmc_stats.states),
                    "counts": self.ctmc_stats.counts.tolist(),
                    "dwell": self.ctmc_stats.dwell.tolist(),
                },
                "epochs_seen": self.epochs_seen,
                "last_time": self.last_time,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "PosteriorState":
        doc = json.loads(text)
        stats = CtmcStats(
            tuple(doc["ctmc_stats"]["states"]),
            np.asarray(doc["ctmc_stats"]["counts"], dtype=float),
            np.asarray(doc["ctmc_stats"]["dwell"], dtype=float),
        )
        return cls(
            mean=np.asarray(doc["mean"], dtype=float),
            covariance=np.asarray(doc["cov"], dtype=float),
            gamma=float(doc["gamma"]),
            ctmc_stats=stats,
            epochs_seen=int(doc.get("epochs_seen", 1)),
            last_time=float(doc.get("last_time", 0.0)),
        )


def update_posterior(
    prior: PosteriorState,
    log: InspectionLog,
    severity: dict[str, float],
    update_ctmc: bool = True,
) -> PosteriorState:
    """Conjugate update on the increments the prior has not seen yet.

    Sequential updates commute with a single batch update; the returned state
    marks every epoch in the log as seen.
    """
    if log.n_epochs <= prior.epochs_seen:
        return prior
    da, es, dts = log.increments(severity, start_epoch=prior.epochs_seen)
    lam = np.linalg.inv(prior.covariance)
    eta = lam @ prior.mean
    g2 = prior.gamma ** 2
    x = np.column_stack([es, dts])
    w = 1.0 / (g2 * dts)
    lam = lam + (x.T * w) @ x
    eta = eta + x.T @ (w * da)
    try:
        cov = np.linalg.inv(lam)
    except np.linalg.LinAlgError as exc:
        raise BayesError(f"singular posterior update: {exc}") from exc
    cov = 0.5 * (cov + cov.T)
    mean = cov @ eta
    t_new = float(log.times[-1])
    stats = prior.ctmc_stats
    if update_ctmc:
        stats = stats.add_window(log.task_history, prior.last_time, t_new)
    return PosteriorState(
        mean=mean,
        covariance=cov,
        gamma=prior.gamma,
        ctmc_stats=stats,
        epochs_seen=log.n_epochs,
        last_time=t_new,
    )


def estimate_gamma(training_logs, severity: dict[str, float]) -> float:
    """Pooled method-of-moments diffusion estimate from historical logs.

    Per log, (alpha, beta) come from a weighted least-squares fit (weights
    1/dt match the increment variances); the standardized squared residuals
    are pooled with a two-parameter degrees-of-freedom correction.
    """
    ss = 0.0
    dof = 0
    n_total = 0
    for log in training_logs:
        da, es, dts = log.increments(severity)
        n_total += da.size
        if da.size < 2:
            continue
        x = np.column_stack([es, dts])
        w = np.sqrt(1.0 / dts)
        coef, *_ = np.linalg.lstsq(x * w[:, None], da * w, rcond=None)
        res = da - x @ coef
        ss += float(np.sum(res ** 2 / dts))
        dof += da.size - 2
    if n_total < 3:
        raise BayesError("at least 3 increments are required to estimate gamma")
    if dof < 1:
        raise BayesError("not enough increments per log to estimate gamma")
    return float(np.sqrt(max(ss, 0.0) / dof))


@dataclass(frozen=True)
class ParameterDraws:
    """Posterior draws consumed by the Monte-Carlo predictor."""

    alphas: np.ndarray
    betas: np.ndarray
    generators: np.ndarray  # (M, n, n) rate matrices

    @property
    def m_total(self) -> int:
        return int(self.alphas.size)


def sample_parameters(
    posterior: PosteriorState, m_total: int, rng_seed
) -> ParameterDraws:
    """Draw M (alpha, beta, Q) triples from the joint posterior.

    Exit rates are Gamma(N_i + a0, T_i + b0) and jump probabilities
    Dirichlet(N_ij + 1); draw m is a pure function of (seed, m).
    """
    if m_total < 1:
        raise BayesError("M must be at least 1")
    rng = np.random.default_rng(rng_seed)
    try:
        chol = np.linalg.cholesky(posterior.covariance)
    except np.linalg.LinAlgError as exc:
        raise BayesError(f"covariance not positive-definite: {exc}") from exc
    z = rng.standard_normal((m_total, 2))
    ab = posterior.mean + z @ chol.T
    stats = posterior.ctmc_stats
    n = len(stats.states)
    gens = np.zeros((m_total, n, n))
    if n > 1:
        rates = np.empty((m_total, n))
        for i in range(n):
            rates[:, i] = rng.gamma(
                stats.counts[i].sum() + GAMMA_HYPER_A,
                1.0 / (stats.dwell[i] + GAMMA_HYPER_B),
                size=m_total,
            )
        for i in range(n):
            others = [j for j in range(n) if j != i]
            g = rng.gamma(stats.counts[i, others] + 1.0, 1.0, size=(m_total, n - 1))
            probs = g / g.sum(axis=1, keepdims=True)
            for jj, j in enumerate(others):
                gens[:, i, j] = rates[:, i] * probs[:, jj]
            gens[:, i, i] = -rates[:, i]
    return ParameterDraws(ab[:, 0].copy(), ab[:, 1].copy(), gens)
