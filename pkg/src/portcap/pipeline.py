"""Run the capacity models over every window of an observation set."""
from __future__ import annotations

import math
from collections.abc import Collection, Mapping

from .anchorage import solve_port_capacity
from .errors import DegenerateObservationError, SolverError, UnstableRegimeError
from .ingest import ObservationBundle
from .report import Section
from .terminal_export import NEAR_CRITICAL_RHO, solve_export_capacity
from .terminal_import import solve_import_capacity
from .units import EPS_STAB, to_hours
from .validation import (DEFAULT_YARD_CAPACITY, NEAR_CRITICAL, STABLE, UNSTABLE_EXPORT,
                         UNSTABLE_IMPORT, summarize_capacity, validate_window)

MODELS = ("anchorage", "import", "export")

UNSTABLE_ANCHORAGE = "unstable-anchorage"
DEGENERATE = "degenerate"
SOLVER_ERROR = "solver-error"
#: Flags that mean a window could not be solved at all.
FAILED_FLAGS = (UNSTABLE_ANCHORAGE, UNSTABLE_IMPORT, UNSTABLE_EXPORT, DEGENERATE, SOLVER_ERROR)

ESTIMATE_COLUMNS = ("window", "model", "service_rate", "traffic_intensity", "predicted_wait",
                    "predicted_queue_length", "observed_wait", "relative_error", "flag",
                    "annotated_unstable", "message")
VALIDATION_COLUMNS = ("window", "import_queue_length", "export_queue_length",
                      "total_queue_length", "calculated_utilization", "observed_utilization",
                      "relative_error", "flag", "annotated_unstable", "message")


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _ordered(bundles: Mapping[str, ObservationBundle]):
    return sorted(bundles.values(), key=lambda b: (b.window.start, b.window.label))


def _row(columns, **values):
    return {c: values.get(c) for c in columns}


def _failure(exc: Exception, unstable_flag: str) -> str:
    if isinstance(exc, UnstableRegimeError):
        return unstable_flag
    if isinstance(exc, SolverError):
        return SOLVER_ERROR
    return DEGENERATE


def _estimate_one(model: str, bundle: ObservationBundle, eps: float, near_critical: float):
    label = bundle.window.label
    if model == "anchorage":
        obs = bundle.anchorage
        observed = None if obs.observed_mean_wait is None else to_hours(obs.observed_mean_wait)
        try:
            est = solve_port_capacity(obs, eps=eps)
        except (UnstableRegimeError, DegenerateObservationError, SolverError) as exc:
            return dict(flag=_failure(exc, UNSTABLE_ANCHORAGE), message=str(exc),
                        observed_wait=_num(observed))
        return dict(service_rate=est.service_rate, traffic_intensity=est.traffic_intensity,
                    predicted_wait=est.predicted_wait,
                    predicted_queue_length=math.fsum(est.predicted_queue_lengths.values()),
                    observed_wait=_num(observed),
                    relative_error=_num(est.observed_wait_relative_error), flag=STABLE)
    if model == "import":
        obs = bundle.imports
        try:
            est = solve_import_capacity(obs, eps=eps)
        except (UnstableRegimeError, DegenerateObservationError, SolverError) as exc:
            return dict(flag=_failure(exc, UNSTABLE_IMPORT), message=str(exc),
                        observed_wait=to_hours(obs.dwell_time))
        flag = NEAR_CRITICAL if est.traffic_intensity > near_critical else STABLE
        return dict(service_rate=est.service_rate, traffic_intensity=est.traffic_intensity,
                    predicted_wait=est.predicted_dwell,
                    predicted_queue_length=est.predicted_queue_length,
                    observed_wait=to_hours(obs.dwell_time), flag=flag)
    obs = bundle.exports
    try:
        est = solve_export_capacity(obs)
    except (UnstableRegimeError, DegenerateObservationError, SolverError) as exc:
        return dict(flag=_failure(exc, UNSTABLE_EXPORT), message=str(exc))
    flag = NEAR_CRITICAL if est.traffic_intensity > near_critical else STABLE
    w = to_hours(obs.dwell_time)
    return dict(service_rate=est.service_rate, traffic_intensity=est.traffic_intensity,
                predicted_wait=w, predicted_queue_length=est.predicted_queue_length,
                observed_wait=w, flag=flag)


def _has(bundle: ObservationBundle, model: str) -> bool:
    return getattr(bundle, {"anchorage": "anchorage", "import": "imports",
                            "export": "exports"}[model]) is not None


def _capacity_summary(rows) -> dict:
    used = [r for r in rows if r["flag"] not in FAILED_FLAGS and not r["annotated_unstable"]]
    mean, sd = summarize_capacity(r["service_rate"] for r in used)
    return {"capacity_mean": _num(mean), "capacity_sd": _num(sd),
            "windows_used": [r["window"] for r in used],
            "windows_excluded": [r["window"] for r in rows if r not in used]}


def estimate_section(bundles: Mapping[str, ObservationBundle], model: str,
                     unstable_windows: Collection[str] = (), eps: float = EPS_STAB,
                     near_critical: float = NEAR_CRITICAL_RHO) -> Section:
    """One row per window that carries inputs for ``model``."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    rows = []
    for b in _ordered(bundles):
        if not _has(b, model):
            continue
        vals = _estimate_one(model, b, eps, near_critical)
        rows.append(_row(ESTIMATE_COLUMNS, window=b.window.label, model=model,
                         annotated_unstable=b.window.label in unstable_windows,
                         **{k: _num(v) if isinstance(v, float) else v for k, v in vals.items()}))
    return Section(model, ESTIMATE_COLUMNS, rows, _capacity_summary(rows))


def validation_section(bundles: Mapping[str, ObservationBundle],
                       yard_capacity: float = DEFAULT_YARD_CAPACITY,
                       unstable_windows: Collection[str] = (), eps: float = EPS_STAB,
                       near_critical: float = NEAR_CRITICAL_RHO) -> Section:
    rows = []
    for b in _ordered(bundles):
        if b.imports is None or b.exports is None:
            continue
        label = b.window.label
        common = dict(window=label, annotated_unstable=label in unstable_windows,
                      observed_utilization=_num(b.observed_utilization))
        try:
            imp = solve_import_capacity(b.imports, eps=eps)
        except (UnstableRegimeError, SolverError) as exc:
            rows.append(_row(VALIDATION_COLUMNS, flag=_failure(exc, UNSTABLE_IMPORT),
                             message=str(exc), **common))
            continue
        try:
            exp = solve_export_capacity(b.exports)
        except (UnstableRegimeError, DegenerateObservationError) as exc:
            rows.append(_row(VALIDATION_COLUMNS, flag=_failure(exc, UNSTABLE_EXPORT),
                             message=str(exc), **common))
            continue
        v = validate_window(b.window, imp, exp, yard_capacity, b.observed_utilization,
                            eps, near_critical)
        rows.append(_row(VALIDATION_COLUMNS,
                         import_queue_length=v.import_queue_length,
                         export_queue_length=v.export_queue_length,
                         total_queue_length=v.total_queue_length,
                         calculated_utilization=v.calculated_utilization,
                         relative_error=_num(v.relative_error),
                         flag=v.stability_flag, **common))
    return Section("validate", VALIDATION_COLUMNS, rows, {"yard_capacity": yard_capacity})
