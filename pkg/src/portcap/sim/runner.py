"""Seeded discrete-event runs for the three port queue topologies.

Every queue is FCFS. Arrivals stop at the horizon and the system then
drains, so each job that arrived inside the observation window has a
complete wait. Queue lengths are time averages over ``[warmup, horizon)``
computed from the jobs' waiting intervals; confidence half-widths come
from equal-length batch means over the same window.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import BATCH, MULTICLASS, TANDEM, SimConfig
from .engine import (ARRIVAL_STREAM, BATCH_STREAM, SERVICE_STREAM, EventCalendar,
                     ExpStream, cumulative_overlap, mean_half_width, stream)

_ARRIVE, _DEPART, _GATE_DONE, _HOLD_DONE, _YARD_DONE = range(5)

# batches up to this size take the pure-Python path; numpy call overhead
# dominates below it
_SMALL_BATCH = 48
_SVC_CHUNK = 1 << 14


@dataclass(frozen=True)
class QueueStats:
    arrivals: int
    arrival_rate: float
    mean_wait: float
    wait_half_width: float
    queue_length: float
    queue_length_half_width: float
    departure_rate: float
    departure_rate_half_width: float


@dataclass(frozen=True)
class SimResult:
    topology: str
    seed: int
    window_hours: float
    classes: dict[str, QueueStats]
    stages: dict[str, QueueStats]
    utilization: dict[str, float]
    flags: tuple[str, ...]


@dataclass(frozen=True)
class JobTrace:
    """Per-job times at the first queue (hours since simulation start)."""

    class_names: tuple[str, ...]
    job_class: np.ndarray
    arrival: np.ndarray
    service_start: np.ndarray
    departure: np.ndarray


def _edges(cfg: SimConfig) -> np.ndarray:
    return np.linspace(cfg.warmup, cfg.horizon, cfg.ci_batches + 1)


def _stats(cfg, edges, arr, start, end, weight=None, wait_sum=None, area=None,
           completions=None) -> QueueStats:
    """Summaries for one queue.

    Jobs are ``(arr, start, end)`` triples; for batch arrivals ``weight`` holds
    unit counts, ``wait_sum`` the summed unit waits per batch, and the
    caller supplies ``area`` (cumulative waiting area at the edges) and
    unit ``completions`` per bin.
    """
    span = cfg.horizon - cfg.warmup
    width = span / cfg.ci_batches
    n_bins = cfg.ci_batches
    inside = (arr >= cfg.warmup) & (arr < cfg.horizon)
    w = np.ones(len(arr)) if weight is None else weight.astype(float)
    waits = (start - arr) * w if wait_sum is None else wait_sum
    idx = np.minimum(((arr[inside] - cfg.warmup) / width).astype(np.int64), n_bins - 1)
    n_bin = np.bincount(idx, weights=w[inside], minlength=n_bins)
    w_bin = np.bincount(idx, weights=waits[inside], minlength=n_bins)
    count = float(n_bin.sum())
    mean_wait = float(w_bin.sum() / count) if count else float("nan")
    with np.errstate(invalid="ignore", divide="ignore"):
        bin_means = np.where(n_bin > 0, w_bin / n_bin, np.nan)

    if area is None:
        area = cumulative_overlap(arr, start, edges)
    l_bins = np.diff(area) / width
    if completions is None:
        completions = np.histogram(end, bins=edges)[0].astype(float)
    d_bins = completions / width
    return QueueStats(
        arrivals=int(round(count)),
        arrival_rate=count / span,
        mean_wait=mean_wait,
        wait_half_width=mean_half_width(bin_means),
        queue_length=float((area[-1] - area[0]) / span),
        queue_length_half_width=mean_half_width(l_bins),
        departure_rate=float(completions.sum() / span),
        departure_rate_half_width=mean_half_width(d_bins),
    )


def _busy_fraction(cfg, edges, start, end, servers=1) -> float:
    area = cumulative_overlap(start, end, edges[[0, -1]])
    return float((area[-1] - area[0]) / ((cfg.horizon - cfg.warmup) * servers))


def _flags(cfg: SimConfig, classes: dict[str, QueueStats]) -> tuple[str, ...]:
    flags = [f"unstable:{stage}" for stage, rho in cfg.offered_loads().items() if rho >= 1.0]
    flags += [f"empty-sample:{name}" for name, s in classes.items() if s.arrivals == 0]
    return tuple(flags)


def _run_multiclass(cfg: SimConfig):
    names = tuple(cfg.arrival_rates)
    inter = [ExpStream(stream(cfg.seed, ARRIVAL_STREAM, i), cfg.arrival_rates[n])
             for i, n in enumerate(names)]
    service = ExpStream(stream(cfg.seed, SERVICE_STREAM, 0), cfg.service_rates[0])
    horizon = cfg.horizon

    cal = EventCalendar()
    for i in range(len(names)):
        cal.schedule(inter[i](), _ARRIVE, i)
    jobs = []
    waiting = deque()
    busy = None
    while len(cal):
        t, kind, payload = cal.pop()
        if kind == _ARRIVE:
            if t >= horizon:
                continue
            job = [payload, t, 0.0, 0.0]
            jobs.append(job)
            cal.schedule(t + inter[payload](), _ARRIVE, payload)
            if busy is None:
                busy = job
                job[2] = t
                cal.schedule(t + service(), _DEPART)
            else:
                waiting.append(job)
        else:
            busy[3] = t
            if waiting:
                busy = waiting.popleft()
                busy[2] = t
                cal.schedule(t + service(), _DEPART)
            else:
                busy = None

    data = np.array(jobs, dtype=float).reshape(-1, 4)
    trace = JobTrace(names, data[:, 0].astype(np.int64), data[:, 1], data[:, 2], data[:, 3])
    edges = _edges(cfg)
    classes = {}
    for i, name in enumerate(names):
        m = trace.job_class == i
        classes[name] = _stats(cfg, edges, trace.arrival[m], trace.service_start[m],
                               trace.departure[m])
    stages = {"server": _stats(cfg, edges, trace.arrival, trace.service_start, trace.departure)}
    util = {"server": _busy_fraction(cfg, edges, trace.service_start, trace.departure)}
    return classes, stages, util, trace


def _run_batch(cfg: SimConfig):
    (name,) = cfg.arrival_rates
    inter = ExpStream(stream(cfg.seed, ARRIVAL_STREAM, 0), cfg.arrival_rates[name])
    unit_rng = stream(cfg.seed, SERVICE_STREAM, 0)
    unit_scale = 1.0 / cfg.service_rates[0]
    size_rng = stream(cfg.seed, BATCH_STREAM)
    sizes = []

    def next_size():
        if not sizes:
            sizes.extend(cfg.batch.sample(size_rng, 1024)[::-1].tolist())
        return sizes.pop()

    edges = _edges(cfg)
    n_bins = cfg.ci_batches
    records = []  # arrival, first service start, last departure, size, summed unit wait

    # unit service times, drawn in chunks and consumed in order
    svc_buf = np.empty(0)
    svc_pos = 0

    def take(k):
        nonlocal svc_buf, svc_pos
        if svc_pos + k > len(svc_buf):
            fresh = unit_rng.exponential(unit_scale, max(_SVC_CHUNK, k))
            svc_buf = np.concatenate((svc_buf[svc_pos:], fresh))
            svc_pos = 0
        out = svc_buf[svc_pos:svc_pos + k]
        svc_pos += k
        return out

    edge_list = edges.tolist()
    tail = [0.0] * (len(edges) + 1)  # area added to every edge from index j on
    done_count = [0.0] * n_bins

    def start_batch(rec, t):
        # units of one batch are served back to back
        k = rec[3]
        a = rec[0]
        rec[1] = t
        if k <= _SMALL_BATCH:
            svc = take(k).tolist()
            starts, done = [], []
            s = t
            for x in svc:
                starts.append(s)
                s += x
                done.append(s)
            wsum = math.fsum(starts) - k * a
            j0 = bisect_right(edge_list, a)
            j1 = bisect_left(edge_list, starts[-1])
            tail[j1] += wsum
            for j in range(j0, j1):
                e = edge_list[j]
                part = sum(min(st, e) - a for st in starts if st > a)
                tail[j] += part
                tail[j + 1] -= part
            for d in done:
                b = bisect_right(edge_list, d) - 1
                if 0 <= b < n_bins:
                    done_count[b] += 1
            rec[2] = s
            rec[4] = wsum
            return s
        svc = take(k)
        done = t + np.cumsum(svc)
        starts = np.concatenate(([t], done[:-1]))
        rec[2] = float(done[-1])
        rec[4] = wsum = float((starts - a).sum())
        # edges at or past the last start see the whole waiting area; only
        # edges falling inside [a, last start] need the clipped sum
        j0 = np.searchsorted(edges, a, "right")
        j1 = np.searchsorted(edges, starts[-1], "left")
        tail[j1] += wsum
        for j in range(j0, j1):
            part = float(np.clip(np.minimum(starts, edges[j]) - a, 0.0, None).sum())
            tail[j] += part
            tail[j + 1] -= part
        b0, b1 = np.searchsorted(edges, (done[0], done[-1]), "right") - 1
        if b0 == b1:
            if 0 <= b0 < n_bins:
                done_count[b0] += len(done)
        else:
            for b, c in enumerate(np.histogram(done, bins=edges)[0]):
                done_count[b] += c
        return rec[2]

    cal = EventCalendar()
    cal.schedule(inter(), _ARRIVE)
    waiting = deque()
    busy = False
    while len(cal):
        t, kind, _ = cal.pop()
        if kind == _ARRIVE:
            if t >= cfg.horizon:
                continue
            rec = [t, 0.0, 0.0, next_size(), 0.0]
            records.append(rec)
            cal.schedule(t + inter(), _ARRIVE)
            if not busy:
                busy = True
                cal.schedule(start_batch(rec, t), _DEPART)
            else:
                waiting.append(rec)
        elif waiting:
            cal.schedule(start_batch(waiting.popleft(), t), _DEPART)
        else:
            busy = False

    data = np.array(records, dtype=float).reshape(-1, 5)
    arr, first, last, size, wsum = data.T
    area = np.cumsum(tail[:-1])
    st = _stats(cfg, edges, arr, first, last, weight=size, wait_sum=wsum,
                area=area, completions=np.array(done_count))
    util = {"server": _busy_fraction(cfg, edges, first, last)}
    trace = JobTrace((name,), np.zeros(len(arr), dtype=np.int64), arr, first, last)
    return {name: st}, {"server": st}, util, trace


def _run_tandem(cfg: SimConfig):
    (name,) = cfg.arrival_rates
    inter = ExpStream(stream(cfg.seed, ARRIVAL_STREAM, 0), cfg.arrival_rates[name])
    gate_svc, hold_svc, yard_svc = (ExpStream(stream(cfg.seed, SERVICE_STREAM, j), mu)
                                    for j, mu in enumerate(cfg.service_rates))
    servers = int(cfg.gate_count)
    horizon = cfg.horizon

    cal = EventCalendar()
    cal.schedule(inter(), _ARRIVE)
    jobs = []  # arrival, gate start, gate end, hold start, hold end, yard start, yard end
    gate_q, hold_q, yard_q = deque(), deque(), deque()
    free_gates = servers
    hold_busy = yard_busy = False
    while len(cal):
        t, kind, job = cal.pop()
        if kind == _ARRIVE:
            if t >= horizon:
                continue
            job = [t, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
            jobs.append(job)
            cal.schedule(t + inter(), _ARRIVE)
            if free_gates:
                free_gates -= 1
                job[1] = t
                cal.schedule(t + gate_svc(), _GATE_DONE, job)
            else:
                gate_q.append(job)
        elif kind == _GATE_DONE:
            job[2] = t
            if gate_q:
                nxt = gate_q.popleft()
                nxt[1] = t
                cal.schedule(t + gate_svc(), _GATE_DONE, nxt)
            else:
                free_gates += 1
            if hold_busy:
                hold_q.append(job)
            else:
                hold_busy = True
                job[3] = t
                cal.schedule(t + hold_svc(), _HOLD_DONE, job)
        elif kind == _HOLD_DONE:
            job[4] = t
            if hold_q:
                nxt = hold_q.popleft()
                nxt[3] = t
                cal.schedule(t + hold_svc(), _HOLD_DONE, nxt)
            else:
                hold_busy = False
            if yard_busy:
                yard_q.append(job)
            else:
                yard_busy = True
                job[5] = t
                cal.schedule(t + yard_svc(), _YARD_DONE, job)
        else:
            job[6] = t
            if yard_q:
                nxt = yard_q.popleft()
                nxt[5] = t
                cal.schedule(t + yard_svc(), _YARD_DONE, nxt)
            else:
                yard_busy = False

    d = np.array(jobs, dtype=float).reshape(-1, 7)
    edges = _edges(cfg)
    stages, util = {}, {}
    for k, (stage, n) in enumerate((("gate", servers), ("holding", 1), ("yard", 1))):
        arr, start, end = d[:, 2 * k], d[:, 2 * k + 1], d[:, 2 * k + 2]
        stages[stage] = _stats(cfg, edges, arr, start, end)
        util[stage] = _busy_fraction(cfg, edges, start, end, n)
    trace = JobTrace((name,), np.zeros(len(d), dtype=np.int64), d[:, 0], d[:, 1], d[:, 2])
    return {name: stages["gate"]}, stages, util, trace


_RUNNERS = {MULTICLASS: _run_multiclass, BATCH: _run_batch, TANDEM: _run_tandem}


def simulate(config: SimConfig) -> tuple[SimResult, JobTrace]:
    """Run once and also return the per-job trace of the first queue."""
    classes, stages, util, trace = _RUNNERS[config.topology](config)
    result = SimResult(
        topology=config.topology,
        seed=config.seed,
        window_hours=config.horizon - config.warmup,
        classes=classes,
        stages=stages,
        utilization=util,
        flags=_flags(config, classes),
    )
    return result, trace


def run_simulation(config: SimConfig) -> SimResult:
    return simulate(config)[0]
