"""Task-severity process: a continuous-time Markov chain over severity states.

Holds the rate matrix Q, the severity magnitude attached to each state, exact
path simulation, stationary analysis, and maximum-likelihood rate estimation
from observed task histories.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

ROW_SUM_TOL = 1e-10
STATIONARY_TOL = 1e-8


class CtmcError(ValueError):
    pass


class NotErgodicError(CtmcError):
    """Raised when an operation requires an irreducible chain and the chain is not."""


@dataclass(frozen=True)
class GeneratorCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class GeneratorReport:
    checks: tuple[GeneratorCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[GeneratorCheck]:
        return [c for c in self.checks if not c.ok]


def validate_generator(generator, n_states: int | None = None) -> GeneratorReport:
    """Check the rate-matrix invariants: square, zero row sums, sign pattern."""
    q = np.asarray(generator, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise CtmcError(f"generator must be square, got shape {q.shape}")
    if n_states is not None and q.shape[0] != n_states:
        raise CtmcError(
            f"generator is {q.shape[0]}x{q.shape[0]} but {n_states} states were given"
        )
    checks = []

    row_sums = q.sum(axis=1)
    bad_rows = np.flatnonzero(np.abs(row_sums) > ROW_SUM_TOL)
    checks.append(
        GeneratorCheck(
            "row_sums_zero",
            bad_rows.size == 0,
            "" if bad_rows.size == 0 else
            "; ".join(f"row {i} sums to {row_sums[i]:.6g}" for i in bad_rows),
        )
    )

    off = q.copy()
    np.fill_diagonal(off, 0.0)
    neg = np.argwhere(off < 0)
    checks.append(
        GeneratorCheck(
            "offdiagonal_nonnegative",
            neg.size == 0,
            "" if neg.size == 0 else
            "; ".join(f"negative off-diagonal at ({i},{j})" for i, j in neg),
        )
    )

    diag = np.diag(q)
    bad_diag = np.flatnonzero(diag > 0)
    checks.append(
        GeneratorCheck(
            "diagonal_nonpositive",
            bad_diag.size == 0,
            "" if bad_diag.size == 0 else
            "; ".join(f"positive diagonal at ({i},{i})" for i in bad_diag),
        )
    )
    return GeneratorReport(tuple(checks))


@dataclass(frozen=True)
class TaskSeverityModel:
    """Severity CTMC: state names, rate matrix Q, and per-state severity magnitude."""

    states: tuple[str, ...]
    generator: np.ndarray
    severity: dict[str, float]

    def __post_init__(self):
        q = np.asarray(self.generator, dtype=float)
        object.__setattr__(self, "generator", q)
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        report = validate_generator(q, n_states=len(self.states))
        if not report.ok:
            msgs = "; ".join(f"{c.name}: {c.detail}" for c in report.failures())
            raise CtmcError(f"invalid generator: {msgs}")
        if set(self.severity) != set(self.states):
            raise CtmcError("severity map must cover every state exactly once")
        vals = np.array([self.severity[s] for s in self.states], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise CtmcError("severity values must be finite")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(str(state))
        except ValueError:
            raise CtmcError(f"unknown state {state!r}") from None

    def severity_vector(self) -> np.ndarray:
        return np.array([self.severity[s] for s in self.states], dtype=float)

    def to_json(self) -> str:
        return json.dumps(
            {
                "states": list(self.states),
                "generator": self.generator.tolist(),
                "severity": {s: self.severity[s] for s in self.states},
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "TaskSeverityModel":
        doc = json.loads(text)
        return cls(
            states=tuple(doc["states"]),
            generator=np.asarray(doc["generator"], dtype=float),
            severity={str(k): float(v) for k, v in doc["severity"].items()},
        )

    @classmethod
    def load(cls, path) -> "TaskSeverityModel":
        return cls.from_json(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


@dataclass(frozen=True)
class SeverityPath:
    """Piecewise-constant severity realization: contiguous (state, start, end) segments."""

    states: tuple[str, ...]
    start_times: np.ndarray
    end_times: np.ndarray

    def __post_init__(self):
        starts = np.asarray(self.start_times, dtype=float)
        ends = np.asarray(self.end_times, dtype=float)
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "start_times", starts)
        object.__setattr__(self, "end_times", ends)
        if not (len(self.states) == starts.size == ends.size):
            raise CtmcError("segment arrays must have equal length")
        if starts.size == 0:
            raise CtmcError("path must contain at least one segment")
        if not np.all(ends > starts):
            raise CtmcError("every segment must have end_time > start_time")
        if starts.size > 1 and not np.allclose(ends[:-1], starts[1:], rtol=0, atol=0):
            raise CtmcError("segments must be contiguous (no gaps or overlaps)")

    @property
    def t_begin(self) -> float:
        return float(self.start_times[0])

    @property
    def t_end(self) -> float:
        return float(self.end_times[-1])

    @property
    def span(self) -> float:
        return self.t_end - self.t_begin

    def severity_values(self, severity: dict[str, float]) -> np.ndarray:
        return np.array([severity[s] for s in self.states], dtype=float)

    def cumulative_severity(self, severity: dict[str, float]) -> tuple[np.ndarray, np.ndarray]:
        """Breakpoints and cumulative integral of severity at segment boundaries.

        The integral of a piecewise-constant function is piecewise linear, so
        np.interp on these arrays evaluates it exactly at any time.
        """
        psi = self.severity_values(severity)
        knots = np.concatenate(([self.t_begin], self.end_times))
        cum = np.concatenate(([0.0], np.cumsum(psi * (self.end_times - self.start_times))))
        return knots, cum

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["state", "start_time", "end_time"])
            for s, t0, t1 in zip(self.states, self.start_times, self.end_times):
                writer.writerow([s, repr(float(t0)), repr(float(t1))])

    @classmethod
    def from_csv(cls, path) -> "SeverityPath":
        states, starts, ends = [], [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                try:
                    states.append(row["state"])
                    starts.append(float(row["start_time"]))
                    ends.append(float(row["end_time"]))
                except (KeyError, TypeError, ValueError) as exc:
                    raise CtmcError(f"{path}: malformed row at line {lineno}: {exc}") from None
        return cls(tuple(states), np.array(starts), np.array(ends))


@dataclass(frozen=True)
class StationaryDistribution:
    """Long-run time proportions of the severity states."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if np.any(p < -ROW_SUM_TOL):
            raise CtmcError("stationary probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > ROW_SUM_TOL:
            raise CtmcError(f"stationary probabilities sum to {p.sum():.12g}, not 1")


def is_ergodic(model: TaskSeverityModel) -> bool:
    """True iff the positive-rate transition graph is strongly connected."""
    q = model.generator
    if q.shape[0] == 1:
        return True
    adj = (q > 0).astype(np.int8)
    np.fill_diagonal(adj, 0)
    n_comp, _ = connected_components(adj, directed=True, connection="strong")
    return n_comp == 1


def stationary_distribution(model: TaskSeverityModel) -> StationaryDistribution:
    """Solve pi Q = 0, sum(pi) = 1 for an ergodic chain.

    One row of Q^T is replaced by the normalization constraint, giving a
    deterministic dense solve instead of an eigenproblem.
    """
    if not is_ergodic(model):
        raise NotErgodicError("chain is not irreducible; no unique stationary distribution")
    n = model.n_states
    a = model.generator.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise CtmcError(f"stationary solve failed: {exc}") from exc
    residual = pi @ model.generator
    if np.max(np.abs(residual)) > STATIONARY_TOL:
        raise CtmcError("stationary solve residual exceeds tolerance")
    return StationaryDistribution(pi)


def simulate_path(
    model: TaskSeverityModel,
    initial_state: str,
    horizon: float,
    rng_seed,
    t_begin: float = 0.0,
    max_segments: int | None = None,
) -> SeverityPath:
    """Exact CTMC simulation over [t_begin, t_begin + horizon].

    Holding times are exponential with the state's exit rate; a state with
    zero exit rate holds for the remaining horizon.  Deterministic given seed.
    """
    if horizon <= 0:
        raise CtmcError("horizon must be positive")
    rng = np.random.default_rng(rng_seed)
    q = model.generator
    i = model.state_index(initial_state)

    states: list[str] = []
    starts: list[float] = []
    ends: list[float] = []
    t = t_begin
    t_stop = t_begin + horizon
    while t < t_stop:
        exit_rate = -q[i, i]
        if exit_rate <= 0:
            hold = t_stop - t
        else:
            hold = rng.exponential(1.0 / exit_rate)
        t_next = min(t + hold, t_stop)
        states.append(model.states[i])
        starts.append(t)
        ends.append(t_next)
        t = t_next
        if t >= t_stop:
            break
        probs = q[i].copy()
        probs[i] = 0.0
        probs /= exit_rate
        i = rng.choice(model.n_states, p=probs)
        if max_segments is not None and len(states) >= max_segments:
            ends[-1] = t_stop  # truncation guard; callers opt in explicitly
            break
    return SeverityPath(tuple(states), np.array(starts), np.array(ends))


def integrated_severity(
    path: SeverityPath, severity: dict[str, float], t0: float, t1: float
) -> float:
    """Exact integral of the severity signal over [t0, t1] (severity * hours)."""
    if t0 > t1:
        raise CtmcError("t0 must not exceed t1")
    if t0 < path.t_begin - 1e-12 or t1 > path.t_end + 1e-12:
        raise CtmcError(
            f"interval [{t0}, {t1}] outside path coverage [{path.t_begin}, {path.t_end}]"
        )
    psi = path.severity_values(severity)
    lo = np.maximum(path.start_times, t0)
    hi = np.minimum(path.end_times, t1)
    overlap = np.clip(hi - lo, 0.0, None)
    return float(np.dot(psi, overlap))


def time_average_severity(path: SeverityPath, severity: dict[str, float]) -> float:
    """Integrated severity over the full path divided by its span."""
    if path.span <= 0:
        raise CtmcError("path has zero length")
    return integrated_severity(path, severity, path.t_begin, path.t_end) / path.span


@dataclass(frozen=True)
class GeneratorEstimate:
    """MLE rates with the sufficient statistics they came from."""

    states: tuple[str, ...]
    rates: np.ndarray            # Q-hat, rows sum to zero
    transition_counts: np.ndarray  # N[i, j], off-diagonal
    dwell_times: np.ndarray      # T[i], hours in state i
    unidentifiable: tuple[str, ...] = ()  # states never visited


def _path_stats(paths, states: tuple[str, ...]):
    index = {s: k for k, s in enumerate(states)}
    n = len(states)
    counts = np.zeros((n, n))
    dwell = np.zeros(n)
    for path in paths:
        idx = [index[s] for s in path.states]
        for k, i in enumerate(idx):
            dwell[i] += path.end_times[k] - path.start_times[k]
            if k + 1 < len(idx) and idx[k + 1] != i:
                counts[i, idx[k + 1]] += 1
    return counts, dwell


def collect_states(paths) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for path in paths:
        for s in path.states:
            seen.setdefault(s, None)
    return tuple(sorted(seen))


def estimate_generator(
    histories, states: tuple[str, ...] | None = None
) -> GeneratorEstimate:
    """Maximum-likelihood rates q_ij = N_ij / T_i from observed severity paths."""
    histories = list(histories)
    if not histories:
        raise CtmcError("at least one history is required")
    if states is None:
        states = collect_states(histories)
    counts, dwell = _path_stats(histories, states)
    n = len(states)
    rates = np.zeros((n, n))
    unident = []
    for i in range(n):
        if dwell[i] > 0:
            rates[i] = counts[i] / dwell[i]
        else:
            unident.append(states[i])
    np.fill_diagonal(rates, 0.0)
    np.fill_diagonal(rates, -rates.sum(axis=1))
    return GeneratorEstimate(states, rates, counts, dwell, tuple(unident))


def empirical_proportions(
    histories, states: tuple[str, ...] | None = None
) -> StationaryDistribution:
    """Observed time proportions pi_i = T_i / sum(T)."""
    histories = list(histories)
    if not histories:
        raise CtmcError("at least one history is required")
    if states is None:
        states = collect_states(histories)
    _, dwell = _path_stats(histories, states)
    total = dwell.sum()
    if total <= 0:
        raise CtmcError("total observed time must be positive")
    return StationaryDistribution(dwell / total)
