import numpy as np
import pytest

from rulcast.bayes import CtmcStats, PosteriorState
from rulcast.ctmc import SeverityPath, TaskSeverityModel


@pytest.fixture
def two_state_model():
    return TaskSeverityModel(
        states=("light", "heavy"),
        generator=np.array([[-1.0, 1.0], [2.0, -2.0]]),
        severity={"light": 1.0, "heavy": 5.0},
    )


@pytest.fixture
def single_state_model():
    return TaskSeverityModel(
        states=("only",), generator=np.array([[0.0]]), severity={"only": 1.0}
    )


@pytest.fixture
def degenerate_posterior(single_state_model):
    """Posterior collapsed (numerically) onto alpha=0.30, beta=0.05, gamma=0.2."""
    return PosteriorState(
        mean=np.array([0.30, 0.05]),
        covariance=1e-18 * np.eye(2),
        gamma=0.2,
        ctmc_stats=CtmcStats.empty(single_state_model.states),
    )


def make_path(specs):
    """Build a SeverityPath from (state, start, end) triples."""
    states = tuple(s for s, _, _ in specs)
    starts = np.array([b for _, b, _ in specs], dtype=float)
    ends = np.array([e for _, _, e in specs], dtype=float)
    return SeverityPath(states, starts, ends)
