"""Relay-aware multicast scheduling for sectored mmWave networks."""

from .baselines import run_adapt, run_fhomb, run_oms
from .config import ExperimentConfig, RadioParams, load_config
from .exact import OptimalResult, SolverBudget, solve_exact
from .harness import aggregate, run_experiment
from .lp import export_lp
from .metrics import MetricsReport, compute_metrics, count_concurrent, count_relay, interference_pct
from .mmdimu import max_throughput_subset, run_mmdimu
from .oracle import check_against_oracle
from .schedule import Schedule, Transmission, validate
from .topology import Scenario, generate_scenario

__all__ = [
    "ExperimentConfig",
    "MetricsReport",
    "OptimalResult",
    "RadioParams",
    "Scenario",
    "Schedule",
    "SolverBudget",
    "Transmission",
    "aggregate",
    "check_against_oracle",
    "compute_metrics",
    "count_concurrent",
    "count_relay",
    "export_lp",
    "generate_scenario",
    "interference_pct",
    "load_config",
    "max_throughput_subset",
    "run_adapt",
    "run_experiment",
    "run_fhomb",
    "run_mmdimu",
    "run_oms",
    "solve_exact",
    "validate",
]
