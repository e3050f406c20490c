"""Yard-occupancy check that ties the import and export estimates together."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .errors import ConfigError
from .terminal_export import NEAR_CRITICAL_RHO, ExportCapacityEstimate
from .terminal_import import ImportCapacityEstimate
from .units import EPS_STAB, Window

#: Barbours Cut yard capacity (containers) estimated from July 2024 inventory.
DEFAULT_YARD_CAPACITY = 25208.0

STABLE = "stable"
UNSTABLE_IMPORT = "unstable-import"
UNSTABLE_EXPORT = "unstable-export"
NEAR_CRITICAL = "near-critical"


@dataclass(frozen=True)
class YardCapacityEstimate:
    capacity: float
    source_inventory: float
    source_utilization: float


def estimate_yard_capacity(inventory: float, utilization: float) -> YardCapacityEstimate:
    """Scale a yard inventory snapshot by its utilization fraction."""
    if not inventory > 0 or not math.isfinite(inventory):
        raise ConfigError(f"yard inventory must be positive, got {inventory}")
    if not 0 < utilization <= 1:
        raise ConfigError(f"utilization must lie in (0, 1], got {utilization}")
    return YardCapacityEstimate(inventory / utilization, inventory, utilization)


@dataclass(frozen=True)
class ValidationRow:
    window: Window
    import_queue_length: float
    export_queue_length: float
    total_queue_length: float
    calculated_utilization: float
    observed_utilization: float | None
    relative_error: float | None
    stability_flag: str


def stability_flag(import_rho: float, export_rho: float, eps: float = EPS_STAB,
                   near_critical: float = NEAR_CRITICAL_RHO) -> str:
    if import_rho >= 1.0 - eps:
        return UNSTABLE_IMPORT
    if export_rho >= 1.0 - eps:
        return UNSTABLE_EXPORT
    if import_rho > near_critical or export_rho > near_critical:
        return NEAR_CRITICAL
    return STABLE


def relative_error(calculated: float, observed: float | None) -> float | None:
    """Signed percent error; ``None`` when there is nothing to compare against."""
    if observed is None or observed == 0 or not math.isfinite(observed):
        return None
    return (calculated - observed) / observed * 100.0


def validate_window(window: Window, import_est: ImportCapacityEstimate,
                    export_est: ExportCapacityEstimate, yard_capacity: float,
                    observed_utilization: float | None, eps: float = EPS_STAB,
                    near_critical: float = NEAR_CRITICAL_RHO) -> ValidationRow:
    """Compare predicted yard occupancy with the observed utilization (percent)."""
    if not yard_capacity > 0 or not math.isfinite(yard_capacity):
        raise ConfigError(f"yard capacity must be positive, got {yard_capacity}")
    li = import_est.predicted_queue_length
    le = export_est.predicted_queue_length
    if not (math.isfinite(li) and math.isfinite(le)):
        raise ConfigError(f"{window.label}: non-finite queue length")
    total = li + le
    util = total / yard_capacity * 100.0
    return ValidationRow(
        window=window,
        import_queue_length=li,
        export_queue_length=le,
        total_queue_length=total,
        calculated_utilization=util,
        observed_utilization=observed_utilization,
        relative_error=relative_error(util, observed_utilization),
        stability_flag=stability_flag(import_est.traffic_intensity,
                                      export_est.traffic_intensity, eps, near_critical),
    )


def summarize_capacity(rates) -> tuple[float, float]:
    """Mean and sample standard deviation of per-window service rates."""
    rates = list(rates)
    if not rates:
        return math.nan, math.nan
    if len(rates) == 1:
        return rates[0], math.nan
    return statistics.fmean(rates), statistics.stdev(rates)
