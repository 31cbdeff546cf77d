"""Brownian-motion-with-drift degradation and its first-passage law.

The accuracy signal drifts at rate alpha * psi(t) + beta, where psi is the
severity process, with diffusion gamma.  For a constant severity the time to
hit the failure threshold is inverse-Gaussian; that law is the closed-form
half of the prediction engine.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.special import log_ndtr, ndtr

from .ctmc import SeverityPath, integrated_severity

GRID_TOL = 1e-12


class DegradationError(ValueError):
    pass


@dataclass(frozen=True)
class DegradationModel:
    """Drift/diffusion parameters, failure threshold, and initial accuracy."""

    alpha: float      # accuracy-units per severity*hour
    beta: float       # accuracy-units per hour
    gamma: float      # accuracy-units per sqrt(hour)
    threshold: float  # failure threshold, accuracy-units
    initial: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise DegradationError("gamma must be positive")
        if self.threshold <= self.initial:
            raise DegradationError("threshold must exceed initial accuracy")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise DegradationError("alpha and beta must be finite")


@dataclass(frozen=True)
class InverseGaussian:
    """Inverse-Gaussian law parameterized by mean and shape (both hours)."""

    mean: float
    shape: float

    def __post_init__(self):
        if self.mean <= 0 or self.shape <= 0:
            raise DegradationError("mean and shape must be positive")

    @property
    def variance(self) -> float:
        return self.mean ** 3 / self.shape

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        out[pos] = np.sqrt(self.shape / (2.0 * np.pi * tp ** 3)) * np.exp(
            -self.shape * (tp - self.mean) ** 2 / (2.0 * self.mean ** 2 * tp)
        )
        return out if out.ndim else float(out)

    def cdf(self, t):
        """F(t) = Phi(sqrt(l/t)(t/m - 1)) + exp(2l/m) Phi(-sqrt(l/t)(t/m + 1)).

        The second term is evaluated as exp(2l/m + log Phi(.)) so the huge
        exponential and the tiny normal tail never meet in the float range.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DegradationError("t must be nonnegative")
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        root = np.sqrt(self.shape / tp)
        out[pos] = ndtr(root * (tp / self.mean - 1.0)) + np.exp(
            2.0 * self.shape / self.mean + log_ndtr(-root * (tp / self.mean + 1.0))
        )
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def quantile(self, p: float) -> float:
        """Inverse cdf by bracketed root finding, |F(t) - p| <= 1e-10."""
        if not 0.0 < p < 1.0:
            raise DegradationError("p must lie strictly in (0, 1)")
        lo, hi = self.mean, self.mean
        while self.cdf(lo) > p:
            lo /= 2.0
            if lo < 1e-300:
                return 0.0
        while self.cdf(hi) < p:
            hi *= 2.0
        if lo == hi:
            return lo
        t = brentq(lambda x: self.cdf(x) - p, lo, hi, xtol=1e-14 * self.mean, rtol=1e-15)
        return float(t)

    def sample(self, rng_seed, n: int) -> np.ndarray:
        """Michael-Schucany-Haas transform sampling."""
        if n < 1:
            raise DegradationError("n must be at least 1")
        rng = np.random.default_rng(rng_seed)
        mu, lam = self.mean, self.shape
        y = rng.standard_normal(n) ** 2
        x = mu + mu * mu * y / (2.0 * lam) - (mu / (2.0 * lam)) * np.sqrt(
            4.0 * mu * lam * y + mu * mu * y * y
        )
        u = rng.random(n)
        take_x = u <= mu / (mu + x)
        return np.where(take_x, x, mu * mu / x)

    def to_json(self) -> str:
        return json.dumps({"mean": self.mean, "shape": self.shape})

    @classmethod
    def from_json(cls, text: str) -> "InverseGaussian":
        doc = json.loads(text)
        return cls(mean=float(doc["mean"]), shape=float(doc["shape"]))


@dataclass(frozen=True)
class DegradationPath:
    """Sampled accuracy trajectory on a uniform time grid."""

    times: np.ndarray
    accuracy: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        a = np.asarray(self.accuracy, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "accuracy", a)
        if t.size != a.size or t.size < 2:
            raise DegradationError("path needs matching times/accuracy with >= 2 samples")
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise DegradationError("times must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > GRID_TOL * max(1.0, abs(t[-1])):
            raise DegradationError("time grid must be uniform")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "accuracy"])
            for t, a in zip(self.times, self.accuracy):
                writer.writerow([repr(float(t)), repr(float(a))])

    @classmethod
    def from_csv(cls, path) -> "DegradationPath":
        times, acc = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                try:
                    times.append(float(row["time"]))
                    acc.append(float(row["accuracy"]))
                except (KeyError, TypeError, ValueError) as exc:
                    raise DegradationError(
                        f"{path}: malformed row at line {lineno}: {exc}"
                    ) from None
        return cls(np.array(times), np.array(acc))


def drift_integral(
    alpha: float,
    beta: float,
    path: SeverityPath,
    severity: dict[str, float],
    t0: float,
    t1: float,
) -> float:
    """alpha * integral(psi) + beta * (t1 - t0) over [t0, t1], exact."""
    return alpha * integrated_severity(path, severity, t0, t1) + beta * (t1 - t0)


def simulate_degradation(
    model: DegradationModel,
    severity_path: SeverityPath,
    severity: dict[str, float],
    dt: float,
    rng_seed,
) -> DegradationPath:
    """Sample the accuracy signal on a uniform grid over the severity path.

    The drift over each step is the exact integral of alpha*psi + beta
    (psi is piecewise constant), so the only discretization is in the
    first-passage detection, not in the dynamics.
    """
    if dt <= 0:
        raise DegradationError("dt must be positive")
    ratio = severity_path.span / dt
    n_steps = int(np.floor(ratio + 1e-9 * max(1.0, ratio)))
    if n_steps < 1:
        raise DegradationError("severity path shorter than one step")
    times = severity_path.t_begin + dt * np.arange(n_steps + 1)
    knots, cum = severity_path.cumulative_severity(severity)
    e_cum = np.interp(times, knots, cum)
    drift_inc = model.alpha * np.diff(e_cum) + model.beta * dt
    rng = np.random.default_rng(rng_seed)
    noise = model.gamma * np.sqrt(dt) * rng.standard_normal(n_steps)
    acc = model.initial + np.concatenate(([0.0], np.cumsum(drift_inc + noise)))
    return DegradationPath(times, acc)


def first_passage(path: DegradationPath, threshold: float) -> float | None:
    """First grid time with accuracy >= threshold, linearly interpolated.

    Returns None when the path never reaches the threshold.  A path starting
    at or above the threshold fails at its first time stamp.
    """
    above = path.accuracy >= threshold
    if not above.any():
        return None
    k = int(np.argmax(above))
    if k == 0:
        return float(path.times[0])
    a0, a1 = path.accuracy[k - 1], path.accuracy[k]
    t0, t1 = path.times[k - 1], path.times[k]
    frac = (threshold - a0) / (a1 - a0)
    return float(t0 + frac * (t1 - t0))
