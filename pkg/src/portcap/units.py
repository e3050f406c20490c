"""Shared domain types and unit conventions.

Every model runs in hours. Rates are plain floats in units per hour;
durations carry their unit until they are normalised with :func:`to_hours`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .errors import ConfigError

#: Traffic intensities at or above ``1 - EPS_STAB`` are treated as unstable.
EPS_STAB = 1e-6

HOURS_PER_DAY = 24.0

DEFAULT_UNIT_LABELS = {
    "container": "containers",
    "break-bulk": "tons",
    "liquid": "cubic meters",
}


@dataclass(frozen=True)
class CargoClass:
    name: str
    unit_label: str = "cargo units"

    def __post_init__(self):
        if not self.name:
            raise ConfigError("cargo class name must be non-empty")

    @classmethod
    def named(cls, name: str) -> "CargoClass":
        return cls(name, DEFAULT_UNIT_LABELS.get(name, "cargo units"))


_QUARTER = re.compile(r"^(\d{4})-Q([1-4])$")
_MONTH = re.compile(r"^(\d{4})-(\d{2})$")
_YEAR = re.compile(r"^(\d{4})$")


def _add_months(year: int, month: int, n: int) -> tuple[int, int]:
    k = year * 12 + (month - 1) + n
    return k // 12, k % 12 + 1


@dataclass(frozen=True)
class Window:
    """A labelled half-open interval ``[start, end)`` of UTC time."""

    label: str
    start: datetime
    end: datetime
    duration_hours: float = field(init=False, compare=False)

    def __post_init__(self):
        if self.end <= self.start:
            raise ConfigError(f"window {self.label!r}: end must be after start")
        hours = (self.end - self.start) / timedelta(hours=1)
        object.__setattr__(self, "duration_hours", hours)

    @classmethod
    def from_label(cls, label: str) -> "Window":
        """Build a calendar window from ``YYYY-Qn``, ``YYYY-MM`` or ``YYYY``."""
        if m := _QUARTER.match(label):
            year, q = int(m.group(1)), int(m.group(2))
            first, span = 3 * (q - 1) + 1, 3
        elif m := _MONTH.match(label):
            year, first, span = int(m.group(1)), int(m.group(2)), 1
            if not 1 <= first <= 12:
                raise ConfigError(f"bad month in window label {label!r}")
        elif m := _YEAR.match(label):
            year, first, span = int(m.group(1)), 1, 12
        else:
            raise ConfigError(
                f"window label {label!r} is not YYYY-Qn, YYYY-MM or YYYY")
        ey, em = _add_months(year, first, span)
        return cls(label,
                   datetime(year, first, 1, tzinfo=timezone.utc),
                   datetime(ey, em, 1, tzinfo=timezone.utc))

    def contains(self, t: datetime) -> bool:
        return self.start <= t < self.end

    def hours_since_start(self, t: datetime) -> float:
        return (t - self.start) / timedelta(hours=1)


@dataclass(frozen=True)
class Duration:
    value: float
    unit: str = "hours"

    def __post_init__(self):
        if self.unit not in ("hours", "days"):
            raise ConfigError(f"unknown duration unit {self.unit!r}")
        if not math.isfinite(self.value) or self.value < 0:
            raise ConfigError(f"duration must be finite and >= 0, got {self.value}")

    def hours(self) -> float:
        return to_hours(self)


def to_hours(d: Duration) -> float:
    if d.unit == "days":
        return d.value * HOURS_PER_DAY
    return d.value


def check_rate(value: float, name: str = "rate") -> float:
    """Validate a per-hour rate (finite, >= 0) and return it as float."""
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ConfigError(f"{name} must be finite and >= 0, got {value}")
    return value


def traffic_intensity(total_arrival: float, service: float) -> float:
    """Arrival rate over service rate. Stability is left to the caller."""
    if service == 0:
        raise ConfigError("zero service rate")
    return total_arrival / service


def is_stable(rho: float, eps: float = EPS_STAB) -> bool:
    return rho < 1.0 - eps
