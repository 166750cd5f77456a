"""Simulator and analytic-oracle toolkit for age-of-information vs. delay tradeoffs."""

from .disciplines import Discipline
from .distributions import (
    ArrivalProcess,
    ServiceDistribution,
    parse_arrival,
    parse_service,
)
from .engine import (
    ExperimentPoint,
    Packet,
    SimulationTrace,
    busy_periods,
    replicate,
    run_point,
    run_simulation,
    throughput,
)
from .errors import DegenerateSampleError, ParameterError, StabilityError
from .experiments import (
    FrontierPoint,
    SweepConfig,
    emit_outputs,
    load_config,
    load_preset,
    pareto_frontier,
    preset_path,
    run_and_emit,
    run_suite,
    scalarized_pick,
)
from .metrics import (
    AgeTracker,
    MetricsReport,
    age_at,
    compute_average_age,
    compute_delay_stats,
    default_window,
    informative_receptions,
    summarize,
)
from .oracles import (
    LimitTable,
    dd1_age,
    gginf_age_estimate,
    min_average_age,
    pending_update_min,
    pk_delay,
    second_moment_table,
    tail_decay_table,
)

__version__ = "0.1.0"

__all__ = [
    "AgeTracker",
    "ArrivalProcess",
    "DegenerateSampleError",
    "Discipline",
    "ExperimentPoint",
    "FrontierPoint",
    "LimitTable",
    "MetricsReport",
    "Packet",
    "ParameterError",
    "ServiceDistribution",
    "SimulationTrace",
    "StabilityError",
    "SweepConfig",
    "age_at",
    "busy_periods",
    "compute_average_age",
    "compute_delay_stats",
    "dd1_age",
    "default_window",
    "emit_outputs",
    "gginf_age_estimate",
    "informative_receptions",
    "load_config",
    "load_preset",
    "min_average_age",
    "pareto_frontier",
    "parse_arrival",
    "parse_service",
    "pending_update_min",
    "pk_delay",
    "preset_path",
    "replicate",
    "run_and_emit",
    "run_point",
    "run_simulation",
    "run_suite",
    "scalarized_pick",
    "second_moment_table",
    "summarize",
    "tail_decay_table",
    "throughput",
]
