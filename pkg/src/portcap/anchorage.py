"""Multiclass M/M/1 anchorage model and the port-capacity least-squares fit.

All classes share one server (the channel entry) so every class sees the
same mean wait; per-class queue lengths differ only through arrival rates.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateObservationError, SolverError, UnstableRegimeError
from .units import EPS_STAB, Duration, Window, check_rate, to_hours

# upper end of the fallback search bracket, as a multiple of total arrivals
_MU_HI_FACTOR = 1e3


@dataclass(frozen=True)
class ClassQueue:
    arrival_rate: float
    queue_length: float


@dataclass(frozen=True)
class AnchorageObservation:
    window: Window
    per_class: Mapping[str, ClassQueue]
    observed_mean_wait: Duration | None = None
    wait_samples: int | None = None

    def __post_init__(self):
        if not self.per_class:
            raise DegenerateObservationError(
                f"{self.window.label}: anchorage observation has no classes")
        for name, q in self.per_class.items():
            check_rate(q.arrival_rate, f"{name} arrival rate")
            if not math.isfinite(q.queue_length) or q.queue_length < 0:
                raise DegenerateObservationError(
                    f"{self.window.label}: {name} queue length must be >= 0")
        if not any(q.arrival_rate > 0 for q in self.per_class.values()):
            raise DegenerateObservationError(
                f"{self.window.label}: all arrival rates are zero")

    @property
    def arrival_rates(self) -> dict[str, float]:
        return {k: q.arrival_rate for k, q in self.per_class.items()}

    @property
    def queue_lengths(self) -> dict[str, float]:
        return {k: q.queue_length for k, q in self.per_class.items()}


@dataclass(frozen=True)
class AnchorageCapacityEstimate:
    service_rate: float
    traffic_intensity: float
    predicted_wait: float
    predicted_queue_lengths: dict[str, float]
    residual: float
    observed_wait_relative_error: float | None = None


def _total(arrival_rates) -> float:
    rates = arrival_rates.values() if isinstance(arrival_rates, Mapping) else arrival_rates
    return float(sum(check_rate(r) for r in rates))


def _wait(total: float, mu: float) -> float:
    # (S / mu^2) / (1 - S / mu), written to avoid cancellation near rho = 1
    return total / (mu * (mu - total))


def anchorage_mean_wait(arrival_rates: Sequence[float] | Mapping[str, float],
                        service_rate: float, eps: float = EPS_STAB) -> float:
    """Mean anchorage wait (hours) shared by every class."""
    total = _total(arrival_rates)
    mu = check_rate(service_rate, "service rate")
    if mu == 0 or total / mu >= 1.0 - eps:
        raise UnstableRegimeError(
            f"unstable anchorage regime (arrivals {total:.6g}/h, service {mu:.6g}/h)")
    return _wait(total, mu)


def anchorage_queue_lengths(arrival_rates, service_rate: float, eps: float = EPS_STAB):
    """Per-class mean queue lengths by Little's law; mirrors the input container."""
    w = anchorage_mean_wait(arrival_rates, service_rate, eps)
    if isinstance(arrival_rates, Mapping):
        return {k: r * w for k, r in arrival_rates.items()}
    return [r * w for r in arrival_rates]


def _objective(lams: np.ndarray, observed: np.ndarray, mu: float) -> float:
    return float(np.sum((lams * _wait(float(lams.sum()), mu) - observed) ** 2))


def _closed_form_mu(lams: np.ndarray, observed: np.ndarray) -> float:
    # The objective depends on mu only through W(mu), so project onto the
    # best W first and invert W(mu) = S / (mu (mu - S)).
    total = float(lams.sum())
    w_star = float(lams @ observed) / float(lams @ lams)
    return 0.5 * (total + math.sqrt(total * total + 4.0 * total / w_star))


def _minimize_mu(lams: np.ndarray, observed: np.ndarray, eps: float) -> float:
    total = float(lams.sum())
    lo = total / (1.0 - eps)
    hi = total * _MU_HI_FACTOR
    # search in log(mu - S): the optimum sits very close to S when rho ~ 1
    a, b = math.log(lo - total), math.log(hi - total)
    res = minimize_scalar(lambda z: _objective(lams, observed, total + math.exp(z)),
                          bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 1000})
    if not res.success:
        raise SolverError(f"bounded minimisation failed: {res.message}")
    return total + math.exp(res.x)


def solve_port_capacity(obs: AnchorageObservation, method: str = "closed-form",
                        eps: float = EPS_STAB) -> AnchorageCapacityEstimate:
    """Fit the channel service rate to the observed per-class queue lengths.

    ``method`` is ``"closed-form"`` (default) or ``"minimize"``; the closed
    form falls back to the bounded search if it yields a non-finite value.
    """
    names = list(obs.per_class)
    lams = np.array([obs.per_class[n].arrival_rate for n in names], dtype=float)
    observed = np.array([obs.per_class[n].queue_length for n in names], dtype=float)
    if not np.any(observed > 0):
        raise DegenerateObservationError(
            f"{obs.window.label}: degenerate observation (all queue lengths are zero)")
    total = float(lams.sum())
    if float(lams @ observed) <= 0:
        raise DegenerateObservationError(
            f"{obs.window.label}: degenerate observation (queues only in zero-rate classes)")

    if method == "closed-form":
        mu = _closed_form_mu(lams, observed)
        if not math.isfinite(mu):
            mu = _minimize_mu(lams, observed, eps)
    elif method == "minimize":
        mu = _minimize_mu(lams, observed, eps)
    else:
        raise ValueError(f"unknown method {method!r}")

    rho = total / mu
    if rho >= 1.0 - eps:
        raise UnstableRegimeError(
            f"{obs.window.label}: no stable fit (best service rate {mu:.6g} "
            f"gives traffic intensity {rho:.8f})")
    w = _wait(total, mu)
    predicted = {n: float(lam) * w for n, lam in zip(names, lams)}
    rel = None
    if obs.observed_mean_wait is not None:
        w_obs = to_hours(obs.observed_mean_wait)
        if w_obs > 0:
            rel = (w - w_obs) / w_obs * 100.0
    return AnchorageCapacityEstimate(
        service_rate=mu,
        traffic_intensity=rho,
        predicted_wait=w,
        predicted_queue_lengths=predicted,
        residual=_objective(lams, observed, mu),
        observed_wait_relative_error=rel,
    )
