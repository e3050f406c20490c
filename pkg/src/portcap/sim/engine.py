"""Event calendar, random streams and batch-means statistics."""
from __future__ import annotations

import heapq
import itertools

import numpy as np
from scipy import stats

# fixed spawn-key offsets; one independent stream per stochastic process
ARRIVAL_STREAM = 0
SERVICE_STREAM = 1
BATCH_STREAM = 2


class EventCalendar:
    """Binary-heap future event list; equal times pop in scheduling order."""

    def __init__(self):
        self._heap = []
        self._seq = itertools.count()

    def schedule(self, time, kind, payload=None):
        heapq.heappush(self._heap, (time, next(self._seq), kind, payload))

    def pop(self):
        time, _, kind, payload = heapq.heappop(self._heap)
        return time, kind, payload

    def __len__(self):
        return len(self._heap)


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


class ExpStream:
    """Exponential variates with the given rate, drawn from ``rng`` in chunks."""

    def __init__(self, rng: np.random.Generator, rate: float, chunk: int = 4096):
        self._rng = rng
        self._scale = 1.0 / rate
        self._chunk = chunk
        self._buf = []

    def __call__(self) -> float:
        if not self._buf:
            # reversed so pop() hands out variates in draw order
            self._buf = (self._rng.exponential(self._scale, self._chunk)[::-1]).tolist()
        return self._buf.pop()

    def many(self, n: int) -> np.ndarray:
        return self._rng.exponential(self._scale, n)


def cumulative_overlap(lo, hi, edges: np.ndarray, chunk: int = 1 << 15) -> np.ndarray:
    """``G(t) = sum_i |[lo_i, hi_i] ∩ (-inf, t]|`` evaluated at every edge.

    Differences of ``G`` across consecutive edges give the area under the
    count-in-state step function on each interval, i.e. time-averaged queue
    lengths without tracking the step function explicitly.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.ndim == 0:
        lo = np.full(hi.shape, float(lo))
    out = np.zeros(len(edges))
    t = edges[:, None]
    for i in range(0, len(hi), chunk):
        h = hi[i:i + chunk]
        lw = lo[i:i + chunk]
        out += np.clip(np.minimum(h, t) - lw, 0.0, None).sum(axis=1)
    return out


def mean_half_width(values: np.ndarray, level: float = 0.95) -> float:
    """Student-t half-width of the mean of (approximately iid) batch means."""
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    n = len(values)
    if n < 2:
        return float("nan")
    q = stats.t.ppf(0.5 + level / 2.0, n - 1)
    return float(q * values.std(ddof=1) / np.sqrt(n))
