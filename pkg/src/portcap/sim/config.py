from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

MULTICLASS = "multiclass-single-server"
BATCH = "batch-single-server"
TANDEM = "tandem-export"
TOPOLOGIES = (MULTICLASS, BATCH, TANDEM)

TANDEM_STAGES = ("gate", "holding", "yard")


@dataclass(frozen=True)
class Deterministic:
    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ConfigError(f"deterministic batch size must be an integer >= 1, got {self.size}")

    def moments(self) -> tuple[float, float]:
        return float(self.size), float(self.size) ** 2

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, int(self.size), dtype=np.int64)


@dataclass(frozen=True)
class Geometric:
    """Geometric batch sizes on ``{1, 2, ...}`` with the given mean."""

    mean: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.mean >= 1):
            raise ConfigError(f"geometric batch mean must be >= 1, got {self.mean}")

    def moments(self) -> tuple[float, float]:
        p = 1.0 / self.mean
        return self.mean, (2.0 - p) / (p * p)

    def sample(self, rng, n):
        return rng.geometric(1.0 / self.mean, size=n).astype(np.int64)


@dataclass(frozen=True)
class Empirical:
    pmf: tuple[tuple[int, float], ...]

    def __post_init__(self):
        pmf = tuple((int(k), float(p)) for k, p in self.pmf)
        object.__setattr__(self, "pmf", pmf)
        if not pmf:
            raise ConfigError("empirical batch distribution is empty")
        if any(k < 1 or p < 0 for k, p in pmf):
            raise ConfigError("empirical batch sizes must be >= 1 with probabilities >= 0")
        total = math.fsum(p for _, p in pmf)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"empirical batch probabilities sum to {total!r}, not 1")

    def moments(self) -> tuple[float, float]:
        m1 = math.fsum(k * p for k, p in self.pmf)
        m2 = math.fsum(k * k * p for k, p in self.pmf)
        return m1, m2

    def sample(self, rng, n):
        sizes = np.array([k for k, _ in self.pmf], dtype=np.int64)
        probs = np.array([p for _, p in self.pmf])
        return rng.choice(sizes, size=n, p=probs / probs.sum())


def parse_batch(value) -> Deterministic | Geometric | Empirical:
    """Build a batch distribution from ``"deterministic:851"``-style text or a dict."""
    if isinstance(value, (Deterministic, Geometric, Empirical)):
        return value
    if isinstance(value, Mapping):
        kind = value.get("kind")
        if kind == "deterministic":
            return Deterministic(int(value["size"]))
        if kind == "geometric":
            return Geometric(float(value["mean"]))
        if kind == "empirical":
            return Empirical(tuple((int(k), float(p)) for k, p in value["pmf"]))
        raise ConfigError(f"unknown batch distribution kind {kind!r}")
    kind, _, arg = str(value).partition(":")
    try:
        if kind == "deterministic":
            return Deterministic(int(arg))
        if kind == "geometric":
            return Geometric(float(arg))
        if kind == "empirical":
            pairs = [item.split("=") for item in arg.split(",") if item]
            return Empirical(tuple((int(k), float(p)) for k, p in pairs))
    except ValueError as exc:
        raise ConfigError(f"bad batch distribution {value!r}: {exc}") from None
    raise ConfigError(f"unknown batch distribution {value!r}")


def batch_to_dict(dist) -> dict:
    if isinstance(dist, Deterministic):
        return {"kind": "deterministic", "size": dist.size}
    if isinstance(dist, Geometric):
        return {"kind": "geometric", "mean": dist.mean}
    return {"kind": "empirical", "pmf": [list(kp) for kp in dist.pmf]}


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    ``service_rates`` holds one rate per stage: a single rate for the two
    single-server topologies, ``(gate per-server, holding, yard)`` for the
    tandem. Times are hours; statistics cover ``[warmup, horizon)``.
    """

    topology: str
    arrival_rates: Mapping[str, float]
    service_rates: tuple[float, ...]
    horizon: float
    warmup: float = 0.0
    seed: int = 0
    batch: Deterministic | Geometric | Empirical | None = None
    gate_count: int | None = None
    ci_batches: int = field(default=20)

    def __post_init__(self):
        object.__setattr__(self, "arrival_rates", dict(self.arrival_rates))
        object.__setattr__(self, "service_rates", tuple(float(m) for m in self.service_rates))
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        if not self.arrival_rates:
            raise ConfigError("at least one arrival class is required")
        for name, lam in self.arrival_rates.items():
            if not (math.isfinite(lam) and lam > 0):
                raise ConfigError(f"arrival rate for {name!r} must be > 0")
        for mu in self.service_rates:
            if not (math.isfinite(mu) and mu > 0):
                raise ConfigError("service rates must be > 0")
        if not (math.isfinite(self.horizon) and 0 <= self.warmup < self.horizon):
            raise ConfigError("horizon must exceed warmup")
        if self.ci_batches < 2:
            raise ConfigError("need at least two batches for confidence intervals")
        stages = 3 if self.topology == TANDEM else 1
        if len(self.service_rates) != stages:
            raise ConfigError(f"{self.topology} needs {stages} service rate(s)")
        if self.topology == BATCH:
            if self.batch is None:
                raise ConfigError("batch-single-server needs a batch distribution")
            object.__setattr__(self, "batch", parse_batch(self.batch))
        if self.topology in (BATCH, TANDEM) and len(self.arrival_rates) != 1:
            raise ConfigError(f"{self.topology} takes exactly one arrival class")
        if self.topology == TANDEM:
            if self.gate_count is None:
                raise ConfigError("tandem-export topology requires gate_count")
            if int(self.gate_count) != self.gate_count or self.gate_count < 1:
                raise ConfigError("gate_count must be a positive integer")

    @property
    def stage_names(self) -> tuple[str, ...]:
        return TANDEM_STAGES if self.topology == TANDEM else ("server",)

    def offered_loads(self) -> dict[str, float]:
        """Traffic intensity at each stage implied by the configured rates."""
        total = sum(self.arrival_rates.values())
        if self.topology == BATCH:
            return {"server": total * self.batch.moments()[0] / self.service_rates[0]}
        if self.topology == TANDEM:
            g, h, y = self.service_rates
            return {"gate": total / (g * self.gate_count), "holding": total / h, "yard": total / y}
        return {"server": total / self.service_rates[0]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimConfig":
        known = {"topology", "arrival_rates", "service_rates", "horizon", "warmup",
                 "seed", "batch", "gate_count", "ci_batches"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown simulation config keys: {sorted(unknown)}")
        kw = dict(d)
        rates = kw.get("arrival_rates")
        if isinstance(rates, (list, tuple)):
            kw["arrival_rates"] = {f"class{i}": r for i, r in enumerate(rates)}
        if kw.get("batch") is not None:
            kw["batch"] = parse_batch(kw["batch"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "topology": self.topology,
            "arrival_rates": dict(self.arrival_rates),
            "service_rates": list(self.service_rates),
            "horizon": self.horizon,
            "warmup": self.warmup,
            "seed": self.seed,
            "batch": None if self.batch is None else batch_to_dict(self.batch),
            "gate_count": self.gate_count,
            "ci_batches": self.ci_batches,
        }
