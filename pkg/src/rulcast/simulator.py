"""Synthetic fleet generation: task schedules, degrading robots, inspection logs.

Stands in for physical case studies: parameterized degradation generators
produce run-to-failure histories with per-robot drift variation and optional
measurement noise on the inspected accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .bayes import InspectionLog
from .ctmc import CtmcError, SeverityPath, TaskSeverityModel, is_ergodic, stationary_distribution

DEFAULT_TASK_CAP = 1_000_000
DEFAULT_MAX_TASK_DURATION = 1e6  # hours; only binds for zero-exit-rate states


class SimulatorError(ValueError):
    pass


@dataclass(frozen=True)
class FleetProfile:
    """Generating parameters for a synthetic robot fleet.

    noise_sd = 0 gives clean accuracy readings ("planar-like"); > 0 injects
    measurement noise the estimator does not model ("spatial-like").
    """

    n_robots: int = 25
    alpha_mean: float = 0.1
    alpha_sd: float = 0.01
    beta_mean: float = 0.05
    beta_sd: float = 0.005
    gamma: float = 0.2
    threshold: float = 30.0
    initial: float = 0.0
    noise_sd: float = 0.0
    cycles_per_epoch: int = 5
    max_tasks: int = DEFAULT_TASK_CAP
    dt: float | None = None

    def __post_init__(self):
        if self.n_robots < 1:
            raise SimulatorError("n_robots must be >= 1")
        if self.noise_sd < 0:
            raise SimulatorError("noise_sd must be >= 0")
        if self.cycles_per_epoch < 1:
            raise SimulatorError("cycles_per_epoch must be >= 1")
        if self.gamma <= 0:
            raise SimulatorError("gamma must be positive")
        if self.threshold <= self.initial:
            raise SimulatorError("threshold must exceed initial accuracy")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FleetProfile":
        return cls(**json.loads(text))

    @classmethod
    def load(cls, path) -> "FleetProfile":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class RobotSim:
    """One simulated robot: true parameters, realized lifetime, inspection log."""

    robot_id: int
    alpha: float
    beta: float
    failure_time: float | None  # L_f, hours; None when the task cap was hit first
    log: InspectionLog

    @property
    def failed(self) -> bool:
        return self.failure_time is not None


def simulate_task_planner(
    model: TaskSeverityModel,
    n_tasks: int,
    rng_seed,
    initial_state: str | None = None,
    max_task_duration: float = DEFAULT_MAX_TASK_DURATION,
):
    """Schedule n_tasks tasks; one task per chain holding interval.

    Returns the severity path and a list of (state, duration) tasks.  Task
    durations are the exponential holding times, capped at max_task_duration
    (the cap only binds for states with zero exit rate).
    """
    if n_tasks < 1:
        raise SimulatorError("n_tasks must be >= 1")
    rng = np.random.default_rng(rng_seed)
    q = model.generator
    if initial_state is None:
        i = 0
    else:
        i = model.state_index(initial_state)
    states, starts, ends = [], [], []
    t = 0.0
    for _ in range(n_tasks):
        exit_rate = -q[i, i]
        if exit_rate <= 0:
            hold = max_task_duration
        else:
            hold = min(rng.exponential(1.0 / exit_rate), max_task_duration)
        states.append(model.states[i])
        starts.append(t)
        ends.append(t + hold)
        t += hold
        if exit_rate > 0:
            probs = q[i].copy()
            probs[i] = 0.0
            probs /= exit_rate
            i = rng.choice(model.n_states, p=probs)
    path = SeverityPath(tuple(states), np.array(starts), np.array(ends))
    tasks = [(s, float(e - b)) for s, b, e in zip(states, starts, ends)]
    return path, tasks


def _default_dt(profile: FleetProfile, model: TaskSeverityModel) -> float:
    psi = model.severity_vector()
    if is_ergodic(model):
        pi = stationary_distribution(model).probabilities
    else:
        pi = np.full(model.n_states, 1.0 / model.n_states)
    rate = profile.alpha_mean * float(pi @ psi) + profile.beta_mean
    if rate <= 0:
        raise SimulatorError("mean drift is not positive; supply an explicit dt")
    return (profile.threshold - profile.initial) / (2000.0 * rate)


def _simulate_robot(
    robot_id: int,
    profile: FleetProfile,
    model: TaskSeverityModel,
    seed_seq: np.random.SeedSequence,
    dt: float,
) -> RobotSim:
    param_ss, task_ss, noise_ss, meas_ss = seed_seq.spawn(4)
    prng = np.random.default_rng(param_ss)
    alpha = profile.alpha_mean + profile.alpha_sd * prng.standard_normal()
    beta = profile.beta_mean + profile.beta_sd * prng.standard_normal()
    task_rng = np.random.default_rng(task_ss)
    noise_rng = np.random.default_rng(noise_ss)
    meas_rng = np.random.default_rng(meas_ss)

    q = model.generator
    psi = model.severity_vector()
    n_c = profile.cycles_per_epoch

    seg_states: list[str] = []
    seg_starts: list[float] = []
    seg_ends: list[float] = []
    epoch_cycles = [0.0]
    epoch_times = [0.0]
    epoch_acc = [profile.initial]

    a = profile.initial
    t = 0.0
    i = 0
    failure_time: float | None = None
    for task_idx in range(1, profile.max_tasks + 1):
        exit_rate = -q[i, i]
        if exit_rate <= 0:
            tau = DEFAULT_MAX_TASK_DURATION
        else:
            tau = task_rng.exponential(1.0 / exit_rate)
        seg_states.append(model.states[i])
        seg_starts.append(t)
        seg_ends.append(t + tau)

        drift = alpha * psi[i] + beta
        n_sub = max(1, int(np.ceil(tau / dt)))
        h = tau / n_sub
        noise = profile.gamma * np.sqrt(h) * noise_rng.standard_normal(n_sub)
        vals = a + np.cumsum(drift * h + noise)
        above = vals >= profile.threshold
        if above.any():
            k = int(np.argmax(above))
            a_prev = a if k == 0 else vals[k - 1]
            failure_time = t + h * k + h * (profile.threshold - a_prev) / (vals[k] - a_prev)
            t += tau
            break
        a = float(vals[-1])
        t += tau

        if task_idx % n_c == 0:
            epoch_cycles.append(epoch_cycles[-1] + n_c)
            epoch_times.append(t)
            measured = a
            if profile.noise_sd > 0:
                measured = a + profile.noise_sd * meas_rng.standard_normal()
            epoch_acc.append(measured)

        if exit_rate > 0:
            probs = q[i].copy()
            probs[i] = 0.0
            probs /= exit_rate
            i = task_rng.choice(model.n_states, p=probs)

    path = SeverityPath(tuple(seg_states), np.array(seg_starts), np.array(seg_ends))
    log = InspectionLog(
        cycles=np.array(epoch_cycles),
        times=np.array(epoch_times),
        accuracy=np.array(epoch_acc),
        task_history=path,
        cycles_per_epoch=n_c,
    )
    return RobotSim(robot_id, float(alpha), float(beta), failure_time, log)


def simulate_fleet(
    profile: FleetProfile, model: TaskSeverityModel, rng_seed
) -> list[RobotSim]:
    """Run-to-failure simulation of a fleet; robot r's seed is (master seed, r)."""
    if not is_ergodic(model):
        raise CtmcError("fleet simulation requires an ergodic severity model")
    dt = profile.dt if profile.dt is not None else _default_dt(profile, model)
    fleet = []
    for r in range(profile.n_robots):
        ss = np.random.SeedSequence((rng_seed, r))
        fleet.append(_simulate_robot(r, profile, model, ss, dt))
    return fleet


def update_schedule(log: InspectionLog, failure_time: float, fractions=(0.3, 0.5, 0.7, 0.9)):
    """Inspection epoch indices nearest from below to each fraction of the lifetime."""
    epochs = []
    for f in fractions:
        target = f * failure_time
        candidates = np.flatnonzero(log.times[1:] <= target + 1e-12)
        if candidates.size == 0:
            raise SimulatorError(
                f"no inspection epoch at or before {f:.0%} of the lifetime"
            )
        epochs.append(int(candidates[-1] + 1))
    return epochs


def write_fleet(fleet: list[RobotSim], out_dir) -> None:
    """One directory per robot: tasks.csv, inspections.csv, truth.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for robot in fleet:
        rdir = out / f"robot_{robot.robot_id:03d}"
        rdir.mkdir(exist_ok=True)
        robot.log.task_history.to_csv(rdir / "tasks.csv")
        robot.log.to_csv(rdir / "inspections.csv")
        (rdir / "truth.json").write_text(
            json.dumps(
                {
                    "robot_id": robot.robot_id,
                    "alpha": robot.alpha,
                    "beta": robot.beta,
                    "failure_time": robot.failure_time,
                    "failed": robot.failed,
                },
                indent=2,
            )
        )


def load_fleet(out_dir, cycles_per_epoch: int) -> list[tuple[dict, InspectionLog]]:
    """Read back (truth, log) pairs written by write_fleet, sorted by robot id."""
    out = Path(out_dir)
    records = []
    for rdir in sorted(out.glob("robot_*")):
        truth = json.loads((rdir / "truth.json").read_text())
        path = SeverityPath.from_csv(rdir / "tasks.csv")
        log = InspectionLog.from_csv(rdir / "inspections.csv", path, cycles_per_epoch)
        records.append((truth, log))
    return records
