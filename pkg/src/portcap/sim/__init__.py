from .analytic import analytic_values, mm1_queue_wait, mms_queue_wait
from .config import (BATCH, MULTICLASS, TANDEM, TOPOLOGIES, Deterministic, Empirical,
                     Geometric, SimConfig, parse_batch)
from .runner import JobTrace, QueueStats, SimResult, run_simulation, simulate

__all__ = [
    "BATCH", "MULTICLASS", "TANDEM", "TOPOLOGIES", "Deterministic", "Empirical",
    "Geometric", "JobTrace", "QueueStats", "SimConfig", "SimResult", "analytic_values",
    "mm1_queue_wait", "mms_queue_wait", "parse_batch", "run_simulation", "simulate",
]
