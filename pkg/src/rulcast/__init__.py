"""Remaining-lifetime prognostics for manipulators under a Markov-modulated task load.

The degradation signal is Brownian motion whose drift depends on the current
task severity, itself a continuous-time Markov chain.  Two predictors are
provided: a closed-form inverse-Gaussian lifetime law built from an effective
degradation rate, and a Monte-Carlo simulator over posterior parameter draws.
"""

from .ctmc import (
    TaskSeverityModel,
    SeverityPath,
    StationaryDistribution,
    NotErgodicError,
    validate_generator,
    is_ergodic,
    stationary_distribution,
    simulate_path,
    integrated_severity,
    time_average_severity,
    estimate_generator,
    empirical_proportions,
)
from .degradation import (
    DegradationModel,
    DegradationPath,
    InverseGaussian,
    drift_integral,
    simulate_degradation,
    first_passage,
)
from .bayes import (
    InspectionLog,
    PosteriorState,
    CtmcStats,
    update_posterior,
    estimate_gamma,
    sample_parameters,
)
from .rld import (
    WhatIfScenario,
    RldClosedForm,
    RldEmpirical,
    MedianRul,
    DegenerateDriftError,
    HorizonTooShortError,
    ExcessiveCensoringError,
    effective_rate,
    rld_approach1,
    rld_approach2,
    rul_median,
    whatif,
    lemma1_check,
    benchmark,
)
from .simulator import (
    FleetProfile,
    RobotSim,
    simulate_task_planner,
    simulate_fleet,
    update_schedule,
)

__version__ = "0.1.0"
