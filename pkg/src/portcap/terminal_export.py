"""Export side of the terminal: the yard stage of the gate -> holding -> yard tandem.

Gate and holding-area departures are Poisson at the gate arrival rate, so
the yard sees the truck arrival stream unchanged and reduces to an M/M/1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DegenerateObservationError, UnstableRegimeError
from .units import Duration, Window, check_rate, to_hours

#: Export traffic intensities above this are reported as near-critical.
NEAR_CRITICAL_RHO = 0.999


@dataclass(frozen=True)
class ExportObservation:
    window: Window
    gate_arrival_rate: float
    dwell_time: Duration
    yard_arrival_rate: float | None = None
    gate_count: int | None = None

    def __post_init__(self):
        check_rate(self.gate_arrival_rate, "gate arrival rate")
        if self.yard_arrival_rate is None:
            object.__setattr__(self, "yard_arrival_rate", float(self.gate_arrival_rate))
        check_rate(self.yard_arrival_rate, "yard arrival rate")
        if self.gate_count is not None and self.gate_count < 1:
            raise ConfigError("gate count must be a positive integer")


@dataclass(frozen=True)
class ExportCapacityEstimate:
    service_rate: float
    traffic_intensity: float
    predicted_queue_length: float

    @property
    def near_critical(self) -> bool:
        return self.traffic_intensity > NEAR_CRITICAL_RHO


def export_service_rate(lam: float, dwell_hours: float) -> float:
    """Yard service rate whose M/M/1 queue wait equals ``dwell_hours``."""
    half = lam / 2.0
    return half + math.sqrt(half * half + lam / dwell_hours)


def export_queue_length(lam: float, mu: float) -> float:
    lam = check_rate(lam, "export arrival rate")
    mu = check_rate(mu, "export service rate")
    if mu <= lam:
        raise UnstableRegimeError(
            f"unstable export regime (arrivals {lam:.6g}/h, service {mu:.6g}/h)")
    return lam * lam / (mu * (mu - lam))


def solve_export_capacity(obs: ExportObservation) -> ExportCapacityEstimate:
    lam = obs.yard_arrival_rate
    w = to_hours(obs.dwell_time)
    if lam <= 0 or w <= 0:
        raise DegenerateObservationError(
            f"{obs.window.label}: degenerate export observation "
            f"(arrival {lam}/h, dwell {w} h)")
    half = lam / 2.0
    root = math.sqrt(half * half + lam / w)
    mu = half + root
    # mu - lam without cancellation; rho is within 1e-4 of 1 for long dwells
    gap = (lam / w) / (half + root)
    return ExportCapacityEstimate(
        service_rate=mu,
        traffic_intensity=lam / mu,
        predicted_queue_length=lam * lam / (mu * gap),
    )
