"""Turn pre-extracted event logs and observation tables into model inputs.

Three CSV formats are understood, each identified by its header:

``events.csv``        ``vessel_id,cargo_class,event,timestamp``
``gates.csv``         ``truck_id,direction,timestamp,container_count``
``observations.csv``  ``window,kind,class,arrival_rate,queue_length,dwell_value,
                      dwell_unit,batch_mean,batch_variance,observed_wait,
                      observed_utilization``

Timestamps are ISO-8601; naive values are taken as UTC.
"""
from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .anchorage import AnchorageObservation, ClassQueue
from .errors import ConfigError, DegenerateObservationError, SchemaError
from .terminal_export import ExportObservation
from .terminal_import import ImportObservation, batch_moments_from_mean_variance
from .units import Duration, Window

log = logging.getLogger(__name__)

EVENT_KINDS = ("anchorage_arrival", "channel_entry", "terminal_arrival", "terminal_departure")
EVENT_COLUMNS = ("vessel_id", "cargo_class", "event", "timestamp")
GATE_COLUMNS = ("truck_id", "direction", "timestamp", "container_count")
OBSERVATION_COLUMNS = ("window", "kind", "class", "arrival_rate", "queue_length",
                       "dwell_value", "dwell_unit", "batch_mean", "batch_variance",
                       "observed_wait", "observed_utilization")
OBSERVATION_KINDS = ("anchorage", "import", "export", "yard")
# same-instant events resolve in life-cycle order (zero-length waits)
_EVENT_RANK = {k: i for i, k in enumerate(EVENT_KINDS)}


@dataclass(frozen=True)
class VesselEvent:
    vessel_id: str
    cargo_class: str
    event: str
    timestamp: datetime

    def __post_init__(self):
        if self.event not in EVENT_KINDS:
            raise SchemaError(f"unknown vessel event {self.event!r}")


@dataclass(frozen=True)
class GateTransaction:
    truck_id: str
    direction: str
    timestamp: datetime
    container_count: int = 1

    def __post_init__(self):
        if self.direction not in ("import", "export"):
            raise SchemaError(f"gate direction must be import or export, got {self.direction!r}")
        if self.container_count < 1:
            raise SchemaError("container_count must be >= 1")


@dataclass(frozen=True)
class ObservationBundle:
    window: Window
    anchorage: AnchorageObservation | None = None
    imports: ImportObservation | None = None
    exports: ExportObservation | None = None
    observed_utilization: float | None = None


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    t = datetime.fromisoformat(text)
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def format_timestamp(t: datetime) -> str:
    return t.astimezone(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


def _hours(delta: timedelta) -> float:
    return delta / timedelta(hours=1)


# -- event logs ---------------------------------------------------------------

def _open_csv(path, expected: tuple[str, ...]):
    fh = open(path, newline="")
    reader = csv.DictReader(fh)
    header = tuple(reader.fieldnames or ())
    missing = [c for c in expected if c not in header]
    if missing:
        fh.close()
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    return fh, reader


def read_events(path) -> list[VesselEvent]:
    fh, reader = _open_csv(path, EVENT_COLUMNS)
    out = []
    with fh:
        for line, row in enumerate(reader, start=2):
            try:
                out.append(VesselEvent(row["vessel_id"], row["cargo_class"], row["event"],
                                       parse_timestamp(row["timestamp"])))
            except (ValueError, TypeError) as exc:
                raise SchemaError(f"{path}: row {line}: {exc}") from None
    return out


def read_gates(path) -> list[GateTransaction]:
    fh, reader = _open_csv(path, GATE_COLUMNS[:3])
    out = []
    with fh:
        for line, row in enumerate(reader, start=2):
            try:
                count = (row.get("container_count") or "").strip()
                out.append(GateTransaction(row["truck_id"], row["direction"],
                                           parse_timestamp(row["timestamp"]),
                                           int(count) if count else 1))
            except (ValueError, TypeError) as exc:
                raise SchemaError(f"{path}: row {line}: {exc}") from None
    return out


def write_events(path, events: Iterable[VesselEvent]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow((e.vessel_id, e.cargo_class, e.event, format_timestamp(e.timestamp)))


def _anchorage_waits(events: Iterable[VesselEvent]):
    """Pair each anchorage arrival with the vessel's next channel entry.

    Yields ``(class, arrival, entry_or_None)``.
    """
    by_vessel = defaultdict(list)
    for e in events:
        by_vessel[e.vessel_id].append(e)
    for vessel in sorted(by_vessel):
        seq = sorted(by_vessel[vessel], key=lambda e: (e.timestamp, _EVENT_RANK[e.event]))
        pending = None
        for e in seq:
            if e.event == "anchorage_arrival":
                if pending is not None:
                    log.warning("vessel %s: anchorage arrival at %s without channel entry "
                                "for the previous one; previous wait left open", vessel,
                                format_timestamp(e.timestamp))
                    yield pending.cargo_class, pending.timestamp, None
                pending = e
            elif e.event == "channel_entry":
                if pending is None:
                    log.warning("vessel %s: channel entry at %s with no prior anchorage "
                                "arrival; skipped", vessel, format_timestamp(e.timestamp))
                    continue
                yield pending.cargo_class, pending.timestamp, e.timestamp
                pending = None
        if pending is not None:
            yield pending.cargo_class, pending.timestamp, None


def aggregate_anchorage(events: Iterable[VesselEvent], window: Window) -> AnchorageObservation:
    """Per-class arrival rates, time-averaged anchorage queues and mean wait.

    A wait counts toward the mean in the window where it ends; a vessel
    still at anchor contributes to the queue length of every window it spans.
    """
    hours = window.duration_hours
    arrivals = defaultdict(int)
    area = defaultdict(float)
    completed = []
    classes = set()
    for cls, arr, entry in _anchorage_waits(events):
        classes.add(cls)
        if window.contains(arr):
            arrivals[cls] += 1
        if entry is not None and window.contains(entry):
            completed.append(_hours(entry - arr))
        lo = max(arr, window.start)
        hi = window.end if entry is None else min(entry, window.end)
        if hi > lo:
            area[cls] += _hours(hi - lo)
    if not arrivals:
        raise DegenerateObservationError(f"{window.label}: empty window (no anchorage arrivals)")
    per_class = {c: ClassQueue(arrivals[c] / hours, area[c] / hours) for c in sorted(classes)}
    mean_wait = Duration(math.fsum(completed) / len(completed)) if completed else None
    return AnchorageObservation(window, per_class, mean_wait, wait_samples=len(completed))


def aggregate_gate(transactions: Iterable[GateTransaction], window: Window) -> float:
    """Export container arrival rate (per hour) through the gates."""
    total = sum(t.container_count for t in transactions
                if t.direction == "export" and window.contains(t.timestamp))
    return total / window.duration_hours


def events_from_trace(trace, epoch: datetime, prefix: str = "V") -> list[VesselEvent]:
    """Anchorage arrival / channel entry events for every simulated vessel.

    ``trace`` is a :class:`portcap.sim.JobTrace` from the multiclass topology;
    simulation hours are offset from ``epoch``.
    """
    out = []
    width = len(str(len(trace.arrival)))
    for k in np.argsort(trace.arrival, kind="stable"):
        vid = f"{prefix}{k:0{width}d}"
        cls = trace.class_names[int(trace.job_class[k])]
        out.append(VesselEvent(vid, cls, "anchorage_arrival",
                               epoch + timedelta(hours=float(trace.arrival[k]))))
        out.append(VesselEvent(vid, cls, "channel_entry",
                               epoch + timedelta(hours=float(trace.service_start[k]))))
    return out


# -- observation tables -------------------------------------------------------

def _field(row, name, line, path, required=True, kind=float):
    text = (row.get(name) or "").strip()
    if not text:
        if required:
            raise SchemaError(f"{path}: row {line}: field {name!r} is required")
        return None
    try:
        value = kind(text)
    except ValueError:
        raise SchemaError(f"{path}: row {line}: field {name!r}: cannot parse {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise SchemaError(f"{path}: row {line}: field {name!r} must be finite")
    return value


def _dwell(row, line, path) -> Duration:
    value = _field(row, "dwell_value", line, path)
    unit = (row.get("dwell_unit") or "").strip() or "hours"
    try:
        return Duration(value, unit)
    except ConfigError as exc:
        raise SchemaError(f"{path}: row {line}: field 'dwell_value'/'dwell_unit': {exc}") from None


def load_observation_file(path, gate_rates: Mapping[str, float] | None = None
                          ) -> dict[str, ObservationBundle]:
    """Load pre-aggregated per-window inputs, keyed by window label.

    Only ``window`` and ``kind`` columns are mandatory in the header; missing
    optional columns read as empty. Export rows may leave ``arrival_rate``
    empty when ``gate_rates`` supplies the window's gate arrival rate.
    """
    path = Path(path)
    gate_rates = gate_rates or {}
    text = path.read_text()
    if not text.strip():
        return {}
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    unknown = [c for c in header if c not in OBSERVATION_COLUMNS]
    if unknown:
        raise SchemaError(f"{path}: unknown column(s) {', '.join(unknown)}")
    for c in ("window", "kind"):
        if c not in header:
            raise SchemaError(f"{path}: missing required column {c!r}")

    windows: dict[str, Window] = {}
    anchorage = defaultdict(dict)
    waits = defaultdict(set)
    imports, exports, utilization = {}, {}, {}

    def once(table, label, line, kind):
        if label in table:
            raise SchemaError(f"{path}: row {line}: duplicate {kind} row for window {label!r}")

    for line, row in enumerate(reader, start=2):
        label = (row.get("window") or "").strip()
        kind = (row.get("kind") or "").strip()
        if not label:
            raise SchemaError(f"{path}: row {line}: field 'window' is required")
        if kind not in OBSERVATION_KINDS:
            raise SchemaError(f"{path}: row {line}: field 'kind': expected one of "
                              f"{OBSERVATION_KINDS}, got {kind!r}")
        if label not in windows:
            try:
                windows[label] = Window.from_label(label)
            except ConfigError as exc:
                raise SchemaError(f"{path}: row {line}: field 'window': {exc}") from None
        window = windows[label]
        util = _field(row, "observed_utilization", line, path, required=kind == "yard")
        if util is not None:
            if label in utilization and utilization[label] != util:
                raise SchemaError(f"{path}: row {line}: field 'observed_utilization' "
                                  f"conflicts with an earlier row for {label!r}")
            utilization[label] = util
        try:
            if kind == "anchorage":
                cls = (row.get("class") or "").strip()
                if not cls:
                    raise SchemaError(f"{path}: row {line}: field 'class' is required")
                if cls in anchorage[label]:
                    raise SchemaError(f"{path}: row {line}: duplicate anchorage class "
                                      f"{cls!r} for window {label!r}")
                anchorage[label][cls] = ClassQueue(_field(row, "arrival_rate", line, path),
                                                   _field(row, "queue_length", line, path))
                w = _field(row, "observed_wait", line, path, required=False)
                if w is not None:
                    waits[label].add(w)
            elif kind == "import":
                once(imports, label, line, kind)
                batch = batch_moments_from_mean_variance(
                    _field(row, "batch_mean", line, path),
                    _field(row, "batch_variance", line, path))
                imports[label] = ImportObservation(
                    window, _field(row, "arrival_rate", line, path), batch,
                    _dwell(row, line, path))
            elif kind == "export":
                once(exports, label, line, kind)
                lam = _field(row, "arrival_rate", line, path, required=label not in gate_rates)
                if lam is None:
                    lam = gate_rates[label]
                exports[label] = ExportObservation(window, lam, _dwell(row, line, path))
        except (ConfigError, DegenerateObservationError) as exc:
            raise SchemaError(f"{path}: row {line}: {exc}") from None

    bundles = {}
    for label, window in windows.items():
        anch = None
        if anchorage.get(label):
            if len(waits[label]) > 1:
                raise SchemaError(f"{path}: window {label!r}: conflicting observed_wait values")
            w = next(iter(waits[label]), None)
            try:
                anch = AnchorageObservation(window, anchorage[label],
                                            None if w is None else Duration(w))
            except (ConfigError, DegenerateObservationError) as exc:
                raise SchemaError(f"{path}: window {label!r}: {exc}") from None
        bundles[label] = ObservationBundle(window, anch, imports.get(label),
                                           exports.get(label), utilization.get(label))
    return bundles


def sniff_kind(path) -> str:
    """Classify a CSV by header: ``events``, ``gates`` or ``observations``."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), [])
    cols = set(h.strip() for h in header)
    if set(EVENT_COLUMNS) <= cols:
        return "events"
    if set(GATE_COLUMNS[:3]) <= cols:
        return "gates"
    return "observations"
