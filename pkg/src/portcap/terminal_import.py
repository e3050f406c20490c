"""Batch-arrival M^[X]/M/1 model of the import yard.

Vessels arrive as a Poisson stream and each drops a random batch of ``X``
cargo units into the yard, which clears units one at a time at rate ``mu``.
Only the first two moments of ``X`` enter the formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .errors import ConfigError, UnstableRegimeError
from .units import EPS_STAB, Duration, Window, check_rate, to_hours

_MU_HI_FACTOR = 1e3


@dataclass(frozen=True)
class BatchMoments:
    mean: float
    second_moment: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.second_moment)):
            raise ConfigError("batch moments must be finite")
        if self.mean < 1:
            raise ConfigError(f"batch mean below one cargo unit ({self.mean})")
        # relative slack so mean**2 round-off does not reject zero-variance batches
        if self.second_moment < self.mean ** 2 * (1 - 1e-12):
            raise ConfigError("second moment is smaller than mean squared")

    @property
    def variance(self) -> float:
        return max(self.second_moment - self.mean ** 2, 0.0)

    @property
    def size_factor(self) -> float:
        """``(E[X] + E[X^2]) / (2 E[X])``, the batch correction in both formulas."""
        return (self.mean + self.second_moment) / (2.0 * self.mean)


def batch_moments_from_mean_variance(mean: float, variance: float) -> BatchMoments:
    if mean < 1:
        raise ConfigError(f"batch mean below one cargo unit ({mean})")
    if variance < 0:
        raise ConfigError(f"negative batch variance ({variance})")
    return BatchMoments(mean, variance + mean * mean)


@dataclass(frozen=True)
class ImportObservation:
    """Arrival rate (vessels/h), batch moments and observed yard dwell.

    A zero dwell is accepted here and rejected by the solver, so that a batch
    run can report the window as infeasible instead of failing to load it.
    """

    window: Window
    vessel_arrival_rate: float
    batch: BatchMoments
    dwell_time: Duration

    def __post_init__(self):
        check_rate(self.vessel_arrival_rate, "import vessel arrival rate")
        if self.vessel_arrival_rate == 0:
            raise ConfigError(f"{self.window.label}: import arrival rate must be > 0")

    @property
    def cargo_arrival_rate(self) -> float:
        return self.vessel_arrival_rate * self.batch.mean


@dataclass(frozen=True)
class ImportCapacityEstimate:
    service_rate: float
    traffic_intensity: float
    predicted_queue_length: float
    predicted_dwell: float


def _check(lam: float, batch: BatchMoments, mu: float, eps: float) -> float:
    a = check_rate(lam, "import arrival rate") * batch.mean
    mu = check_rate(mu, "import service rate")
    if mu == 0 or a / mu >= 1.0 - eps:
        raise UnstableRegimeError(
            f"unstable import regime (cargo arrivals {a:.6g}/h, service {mu:.6g}/h)")
    return a


def import_dwell(lam: float, batch: BatchMoments, mu: float, eps: float = EPS_STAB) -> float:
    """Mean yard wait (hours) of an import unit before its own service starts."""
    a = _check(lam, batch, mu, eps)
    return batch.size_factor / (mu - a) - 1.0 / mu


def import_queue_length(lam: float, batch: BatchMoments, mu: float,
                        eps: float = EPS_STAB) -> float:
    a = _check(lam, batch, mu, eps)
    rho = a / mu
    return rho / (1.0 - rho) * batch.size_factor - rho


def import_service_rate_quadratic(lam: float, batch: BatchMoments, dwell_hours: float) -> float:
    """Positive root of ``W mu^2 - (W a + K - 1) mu - a = 0``."""
    a = lam * batch.mean
    w = dwell_hours
    b = w * a + batch.size_factor - 1.0
    return (b + math.sqrt(b * b + 4.0 * w * a)) / (2.0 * w)


def _bisect_service_rate(lam: float, batch: BatchMoments, w_obs: float, eps: float) -> float:
    a = lam * batch.mean
    lo = a / (1.0 - eps)
    if batch.size_factor / (lo - a) - 1.0 / lo <= w_obs:
        raise UnstableRegimeError(
            f"no feasible service rate: dwell {w_obs:.6g} h needs traffic intensity >= 1 - eps")
    hi = a * _MU_HI_FACTOR
    # very short dwells push the root past the default bracket
    while batch.size_factor / (hi - a) - 1.0 / hi > w_obs:
        hi *= 10.0
        if not math.isfinite(hi):
            raise UnstableRegimeError("no feasible service rate: bracket overflow")
    return bisect(lambda mu: batch.size_factor / (mu - a) - 1.0 / mu - w_obs,
                  lo, hi, xtol=1e-300, rtol=1e-14, maxiter=2000)


def solve_import_capacity(obs: ImportObservation, method: str = "bisect",
                          eps: float = EPS_STAB) -> ImportCapacityEstimate:
    """Service rate reproducing the observed dwell; ``method`` is ``bisect`` or ``quadratic``."""
    w_obs = to_hours(obs.dwell_time)
    if not math.isfinite(w_obs) or w_obs <= 0:
        raise UnstableRegimeError(
            f"{obs.window.label}: no feasible service rate for dwell {w_obs} h")
    lam, batch = obs.vessel_arrival_rate, obs.batch
    if method == "bisect":
        mu = _bisect_service_rate(lam, batch, w_obs, eps)
    elif method == "quadratic":
        mu = import_service_rate_quadratic(lam, batch, w_obs)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ImportCapacityEstimate(
        service_rate=mu,
        traffic_intensity=lam * batch.mean / mu,
        predicted_queue_length=import_queue_length(lam, batch, mu, eps),
        predicted_dwell=import_dwell(lam, batch, mu, eps),
    )
