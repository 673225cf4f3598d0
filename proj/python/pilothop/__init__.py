"""Correlated activity detection with pilot-hopping sequences."""

from ._core import (
    Scenario,
    __version__,
    build_scenario,
    default_config,
    kkt_residual,
    kmeans,
    match_events,
    nnls,
    objective,
    prox_group_l2,
    run_experiment,
    simulate_trial,
    solve,
)

__all__ = [
    "Scenario",
    "__version__",
    "build_scenario",
    "default_config",
    "kkt_residual",
    "kmeans",
    "match_events",
    "nnls",
    "objective",
    "prox_group_l2",
    "run_experiment",
    "simulate_trial",
    "solve",
]
