"""Command-line pipeline: simulate -> fit -> predict -> whatif -> lemma-check -> bench -> serve.

Every randomized subcommand requires an explicit --seed; outputs under a fixed
seed are byte-stable across runs.  Exit codes: 0 success, 1 validation error,
2 runtime error.
"""

from __future__ import annotations

import json
import sys
from functools import wraps
from pathlib import Path

import click
import numpy as np

from . import _kernels
from .bayes import BayesError, PosteriorState, estimate_gamma, update_posterior
from .ctmc import CtmcError, TaskSeverityModel, stationary_distribution
from .degradation import DegradationError
from .rld import (
    RldError,
    WhatIfScenario,
    benchmark,
    effective_rate,
    lemma1_check,
    rld_approach1,
    rld_approach2,
    rul_median,
    whatif,
    whatif_to_csv,
)
from .simulator import (
    FleetProfile,
    SimulatorError,
    load_fleet,
    simulate_fleet,
    update_schedule,
    write_fleet,
)

VALIDATION_ERRORS = (
    CtmcError,
    DegradationError,
    BayesError,
    RldError,
    SimulatorError,
    ValueError,
    FileNotFoundError,
    json.JSONDecodeError,
)


def _guard(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except VALIDATION_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except Exception as exc:  # noqa: BLE001 - CLI boundary
            click.echo(f"runtime error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _parse_pi(values) -> list[WhatIfScenario]:
    scenarios = []
    for raw in values:
        try:
            parts = [float(x) for x in raw.split(",")]
        except ValueError:
            raise RldError(f"--pi expects comma-separated numbers, got {raw!r}") from None
        scenarios.append(WhatIfScenario(np.array(parts)))
    return scenarios


@click.group()
@click.option("--jobs", type=int, default=None, help="cap worker threads")
def main(jobs):
    """Remaining-lifetime prognostics toolkit."""
    if jobs is not None:
        _kernels.set_num_threads(jobs)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--fleet", "fleet_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", required=True, type=int)
@_guard
def simulate(model_path, fleet_path, out_dir, seed):
    """Simulate a synthetic fleet and write one directory per robot."""
    model = TaskSeverityModel.load(model_path)
    profile = FleetProfile.load(fleet_path)
    fleet = simulate_fleet(profile, model, seed)
    write_fleet(fleet, out_dir)
    failed = sum(1 for r in fleet if r.failed)
    click.echo(f"wrote {len(fleet)} robots ({failed} failed) to {out_dir}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--fleet", "fleet_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--update-points", default="0.3,0.5,0.7,0.9", show_default=True,
              help="fractions of the realized lifetime")
@_guard
def fit(model_path, fleet_path, data_dir, out_dir, update_points):
    """Fit posteriors per robot at each update point; writes posterior JSON files."""
    model = TaskSeverityModel.load(model_path)
    profile = FleetProfile.load(fleet_path)
    fractions = [float(x) for x in update_points.split(",")]
    records = load_fleet(data_dir, profile.cycles_per_epoch)
    logs = [log for _, log in records]
    gamma_hat = estimate_gamma(logs, model.severity)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "gamma.json").write_text(json.dumps({"gamma": gamma_hat}, indent=2))
    n_written = 0
    for truth, log in records:
        if truth["failure_time"] is None:
            continue
        try:
            epochs = update_schedule(log, truth["failure_time"], fractions)
        except SimulatorError:
            continue
        for frac, k in zip(fractions, epochs):
            from .bayes import InspectionLog

            partial = InspectionLog(
                log.cycles[: k + 1], log.times[: k + 1], log.accuracy[: k + 1],
                log.task_history, log.cycles_per_epoch,
            )
            post = PosteriorState.diffuse(gamma_hat, model.states)
            post = update_posterior(post, partial, model.severity)
            name = f"robot_{truth['robot_id']:03d}_up{int(round(frac * 100)):02d}.json"
            (out / name).write_text(post.to_json())
            n_written += 1
    click.echo(f"wrote {n_written} posteriors (gamma={gamma_hat:.6g}) to {out_dir}")


@main.command()
@click.option("--posterior", "posterior_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--approach", type=click.Choice(["1", "2"]), required=True)
@click.option("--accuracy", "a_ck", required=True, type=float, help="current accuracy A(c_k)")
@click.option("--threshold", required=True, type=float, help="failure threshold D")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--pi", "pi_values", multiple=True,
              help="task proportions for approach 1 (default: stationary)")
@click.option("--M", "m_total", type=int, default=10000, show_default=True)
@click.option("--horizon", type=float, default=None,
              help="prediction horizon in hours (approach 2); default 50 expected lifetimes")
@click.option("--dt", type=float, default=None)
@click.option("--seed", type=int, default=None, help="required for approach 2")
@click.option("--state", "current_state", default=None,
              help="current severity state (approach 2); default: first state")
@_guard
def predict(posterior_path, model_path, approach, a_ck, threshold, out_path,
            pi_values, m_total, horizon, dt, seed, current_state):
    """Predict the remaining lifetime distribution and write it as JSON."""
    post = PosteriorState.from_json(Path(posterior_path).read_text())
    model = TaskSeverityModel.load(model_path)
    psi = model.severity_vector()
    if approach == "1":
        if pi_values:
            pi = _parse_pi(pi_values)[0]
        else:
            pi = stationary_distribution(model)
        rate = effective_rate(post.mean, pi, psi)
        closed = rld_approach1(a_ck, threshold, rate, post.gamma)
        med = rul_median(closed)
        Path(out_path).write_text(closed.to_json(median_hours=med.hours) + "\n")
    else:
        if seed is None:
            raise RldError("approach 2 requires an explicit --seed")
        state = current_state if current_state is not None else model.states[0]
        if horizon is None:
            rate = effective_rate(post.mean, stationary_distribution(model), psi)
            horizon = 50.0 * (threshold - a_ck) / rate
        emp = rld_approach2(a_ck, threshold, post, model, state, m_total,
                            horizon, seed, dt=dt)
        Path(out_path).write_text(emp.to_json() + "\n")
    click.echo(f"wrote {out_path}")


@main.command("whatif")
@click.option("--posterior", "posterior_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--accuracy", "a_ck", required=True, type=float)
@click.option("--threshold", required=True, type=float)
@click.option("--pi", "pi_values", multiple=True, required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--epoch-hours", type=float, default=None,
              help="mean epoch duration for the cycle conversion")
@_guard
def whatif_cmd(posterior_path, model_path, a_ck, threshold, pi_values, out_path, epoch_hours):
    """Predicted lifetime under each hypothesized task-proportion vector (CSV)."""
    post = PosteriorState.from_json(Path(posterior_path).read_text())
    model = TaskSeverityModel.load(model_path)
    scenarios = _parse_pi(pi_values)
    rows = whatif(
        post, a_ck, threshold, scenarios, model.severity_vector(),
        mean_epoch_hours=epoch_hours,
        cycles_per_epoch=None if epoch_hours is None else 1,
    )
    whatif_to_csv(rows, out_path)
    click.echo(f"wrote {len(rows)} scenarios to {out_path}")


@main.command("lemma-check")
@click.option("--posterior", "posterior_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--accuracy", "a_ck", required=True, type=float)
@click.option("--threshold", required=True, type=float)
@click.option("--M", "m_total", type=int, default=5000, show_default=True)
@click.option("--horizon-mult", type=float, default=50.0, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--state", "current_state", default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guard
def lemma_check(posterior_path, model_path, a_ck, threshold, m_total,
                horizon_mult, seed, current_state, out_path):
    """Check the closed-form mean lifetime against the Monte-Carlo mean."""
    post = PosteriorState.from_json(Path(posterior_path).read_text())
    model = TaskSeverityModel.load(model_path)
    state = current_state if current_state is not None else model.states[0]
    report = lemma1_check(post, model, state, a_ck, threshold, m_total,
                          horizon_mult, seed)
    Path(out_path).write_text(report.to_json() + "\n")
    click.echo(("PASS" if report.passed else "FAIL")
               + f"  E[T1]={report.expected_t1:.4f}  mean(T2)={report.mean_t2:.4f}")


@main.command()
@click.option("--posterior", "posterior_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--accuracy", "a_ck", required=True, type=float)
@click.option("--threshold", required=True, type=float)
@click.option("--M", "m_values", multiple=True, type=int, default=(1000, 10000),
              show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--state", "current_state", default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@_guard
def bench(posterior_path, model_path, a_ck, threshold, m_values, seed,
          current_state, out_path):
    """Time the closed-form route against the Monte-Carlo route."""
    post = PosteriorState.from_json(Path(posterior_path).read_text())
    model = TaskSeverityModel.load(model_path)
    state = current_state if current_state is not None else model.states[0]
    report = benchmark(post, model, state, a_ck, threshold, m_values, seed)
    Path(out_path).write_text(report.to_json() + "\n")
    for m, s in zip(report.m_grid, report.speedups):
        click.echo(f"M={m}: closed-form speedup {s:.0f}x")


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@_guard
def serve(data_dir, port, host):
    """Start the JSON-over-HTTP prediction service."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port)


if __name__ == "__main__":
    main()
