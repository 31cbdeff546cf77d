"""Regenerate the dashboard test fixtures from the prediction service.

Writes JSON consumed by the vitest suite:
  - ig_reference.json: inverse-Gaussian cdf reference points from the backend
  - whatif_responses.json: /whatif responses for the three preset mixes at an
    early and a late update point of one fixture robot

Run from the repo root: python3 frontend/scripts/make_fixtures.py
"""

import json
from pathlib import Path

import numpy as np

from rulcast.bayes import CtmcStats, InspectionLog, PosteriorState, update_posterior
from rulcast.ctmc import TaskSeverityModel
from rulcast.degradation import InverseGaussian
from rulcast.simulator import FleetProfile, simulate_fleet, update_schedule

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
PRESETS = [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]]

MODEL = TaskSeverityModel(
    ("light", "heavy"), [[-1.0, 1.0], [2.0, -2.0]], {"light": 1.0, "heavy": 5.0}
)


def ig_reference() -> dict:
    cases = [(12.0, 36.0), (17.142857142857142, 900.0), (2.0, 0.5),
             (40.0, 7225.0), (6.0, 180.0)]
    points = []
    for mean, shape in cases:
        dist = InverseGaussian(mean, shape)
        for t in (0.35 * mean, 1.6 * mean):
            points.append({
                "mean": mean, "shape": shape, "t": t, "cdf": float(dist.cdf(t)),
            })
    assert len(points) == 10
    return {"points": points}


def whatif_responses() -> dict:
    profile = FleetProfile(n_robots=25)
    fleet = simulate_fleet(profile, MODEL, 2024)
    robot = next(r for r in fleet if r.failed)
    posterior_means = []
    from rulcast.bayes import estimate_gamma

    gamma_hat = estimate_gamma([r.log for r in fleet], MODEL.severity)
    for r in fleet:
        post = PosteriorState.diffuse(gamma_hat, MODEL.states)
        posterior_means.append(update_posterior(post, r.log, MODEL.severity).mean)
    prior_mean = np.mean(posterior_means[1:], axis=0)
    prior_cov = np.cov(np.array(posterior_means[1:]).T) + 1e-8 * np.eye(2)

    from rulcast.rld import whatif

    epochs = update_schedule(robot.log, robot.failure_time, fractions=(0.3, 0.9))
    out = {"robot_id": "fixture-robot", "update_points": {}}
    for frac, k in zip(("30", "90"), epochs):
        partial = InspectionLog(
            robot.log.cycles[: k + 1], robot.log.times[: k + 1],
            robot.log.accuracy[: k + 1], robot.log.task_history,
            robot.log.cycles_per_epoch,
        )
        prior = PosteriorState(prior_mean, prior_cov, gamma_hat,
                               CtmcStats.empty(MODEL.states))
        post = update_posterior(prior, partial, MODEL.severity)
        rows = whatif(post, float(partial.accuracy[-1]), profile.threshold,
                      PRESETS, MODEL.severity_vector())
        out["update_points"][frac] = {
            "accuracy": float(partial.accuracy[-1]),
            "threshold": profile.threshold,
            "rows": [
                {
                    "pi": list(r.pi),
                    "median_hours": r.median_hours,
                    "ig_mean": r.ig_mean,
                    "ig_shape": r.ig_shape,
                }
                for r in rows
            ],
        }
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "ig_reference.json").write_text(
        json.dumps(ig_reference(), indent=2) + "\n"
    )
    (OUT / "whatif_responses.json").write_text(
        json.dumps(whatif_responses(), indent=2) + "\n"
    )
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
