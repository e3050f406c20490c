"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 solver error. Windows that fail a
stability check are reported as flagged rows and do not change the code.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field

from . import houston
from .errors import PortCapError
from .ingest import (ObservationBundle, aggregate_anchorage, aggregate_gate,
                     load_observation_file, read_events, read_gates, sniff_kind)
from .pipeline import (DEGENERATE, MODELS, SOLVER_ERROR, estimate_section,
                       validation_section)
from .report import FORMATS, Report, Section, render
from .sim import TOPOLOGIES, SimConfig, analytic_values, run_simulation
from .terminal_export import NEAR_CRITICAL_RHO
from .units import EPS_STAB, Window
from .validation import DEFAULT_YARD_CAPACITY

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2

BUILTIN_PREFIX = "builtin:"


@dataclass
class RunConfig:
    inputs: list[str]
    windows: list[str] = field(default_factory=list)
    model: str = "all"
    fmt: str = "table"
    yard_capacity: float = DEFAULT_YARD_CAPACITY
    eps_stab: float = EPS_STAB
    near_critical: float = NEAR_CRITICAL_RHO
    unstable_windows: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.yard_capacity > 0:
            raise PortCapError("yard capacity must be positive")
        if self.fmt not in FORMATS:
            raise PortCapError(f"unknown format {self.fmt!r}")


def _labels(text: str | None) -> list[str]:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


def load_inputs(cfg: RunConfig) -> dict[str, ObservationBundle]:
    """Merge observation files, event logs and gate logs into per-window bundles."""
    windows = [Window.from_label(label) for label in cfg.windows]
    observations, events, gates = [], [], []
    for path in cfg.inputs:
        if path == BUILTIN_PREFIX + houston.FIXTURE_NAME:
            observations.append(houston.fixture_path())
            continue
        kind = sniff_kind(path)
        {"events": events, "gates": gates, "observations": observations}[kind].append(path)
    if (events or gates) and not windows:
        raise PortCapError("event and gate logs need --windows to aggregate over")

    gate_rates = {}
    if gates:
        records = [t for p in gates for t in read_gates(p)]
        gate_rates = {w.label: aggregate_gate(records, w) for w in windows}

    bundles: dict[str, ObservationBundle] = {}
    for path in observations:
        for label, b in load_observation_file(path, gate_rates).items():
            if label in bundles:
                raise PortCapError(f"{path}: duplicate window label {label!r} across inputs")
            bundles[label] = b

    if events:
        records = [e for p in events for e in read_events(p)]
        for w in windows:
            anch = aggregate_anchorage(records, w)
            old = bundles.get(w.label)
            if old is not None and old.anchorage is not None:
                raise PortCapError(f"window {w.label!r} has anchorage inputs from two sources")
            bundles[w.label] = ObservationBundle(
                w, anch, *(() if old is None else (old.imports, old.exports,
                                                   old.observed_utilization)))
    if cfg.windows:
        bundles = {k: v for k, v in bundles.items() if k in cfg.windows}
    return bundles


def build_report(cfg: RunConfig, bundles) -> Report:
    models = MODELS if cfg.model == "all" else (() if cfg.model == "validate" else (cfg.model,))
    kw = dict(unstable_windows=set(cfg.unstable_windows), eps=cfg.eps_stab,
              near_critical=cfg.near_critical)
    sections = [estimate_section(bundles, m, **kw) for m in models]
    if cfg.model in ("validate", "all"):
        sections.append(validation_section(bundles, cfg.yard_capacity, **kw))
    return Report(sections)


def _solver_failed(report: Report) -> bool:
    return any(r.get("flag") in (DEGENERATE, SOLVER_ERROR)
               for s in report.sections for r in s.rows)


def cmd_estimate(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    report = build_report(cfg, load_inputs(cfg))
    out.write(render(report, cfg.fmt))
    return EXIT_SOLVER if _solver_failed(report) else EXIT_OK


def cmd_validate(cfg: RunConfig, out=None) -> int:
    cfg.model = "validate"
    return cmd_estimate(cfg, out)


SIM_COLUMNS = ("queue", "arrivals", "arrival_rate", "mean_wait", "wait_half_width",
               "analytic_wait", "queue_length", "queue_length_half_width",
               "analytic_queue_length", "utilization", "departure_rate",
               "departure_rate_half_width")


def simulation_report(sim: SimConfig) -> Report:
    result = run_simulation(sim)
    analytic = analytic_values(sim)
    rows = []
    entries = list(result.stages.items())
    if sim.topology == "multiclass-single-server" and len(result.classes) > 1:
        entries += list(result.classes.items())
    for name, st in entries:
        a = analytic.get(name) or {}
        rows.append({
            "queue": name, "arrivals": st.arrivals, "arrival_rate": st.arrival_rate,
            "mean_wait": st.mean_wait, "wait_half_width": st.wait_half_width,
            "analytic_wait": a.get("mean_wait"), "queue_length": st.queue_length,
            "queue_length_half_width": st.queue_length_half_width,
            "analytic_queue_length": a.get("queue_length"),
            "utilization": result.utilization.get(name),
            "departure_rate": st.departure_rate,
            "departure_rate_half_width": st.departure_rate_half_width,
        })
    for r in rows:
        for k, v in r.items():
            if isinstance(v, float) and v != v:
                r[k] = None
    summary = {"topology": sim.topology, "seed": sim.seed, "window_hours": result.window_hours,
               "flags": list(result.flags)}
    return Report([Section("simulation", SIM_COLUMNS, rows, summary)])


def cmd_simulate(sim: SimConfig, fmt: str = "table", out=None) -> int:
    out = out or sys.stdout
    out.write(render(simulation_report(sim), fmt))
    return EXIT_OK


def _rates(text: str) -> dict[str, float]:
    out = {}
    for i, item in enumerate(_labels(text)):
        name, sep, value = item.rpartition("=")
        out[name if sep else f"class{i}"] = float(value)
    return out


def _sim_config(args) -> SimConfig:
    d = {}
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
    for key, value in (("topology", args.topology), ("horizon", args.horizon),
                       ("warmup", args.warmup), ("seed", args.seed),
                       ("gate_count", args.gate_count), ("batch", args.batch)):
        if value is not None:
            d[key] = value
    if args.arrival_rates:
        d["arrival_rates"] = _rates(args.arrival_rates)
    if args.service_rates:
        d["service_rates"] = [float(v) for v in _labels(args.service_rates)]
    d.setdefault("seed", 0)
    missing = [k for k in ("topology", "arrival_rates", "service_rates", "horizon") if k not in d]
    if missing:
        raise PortCapError(f"simulate needs {', '.join(missing)} (flags or --config)")
    return SimConfig.from_dict(d)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which here means a solver failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="portcap",
                                description="Port operating-capacity estimation from queue statistics.")
    sub = p.add_subparsers(dest="command", required=True)

    def data_flags(sp, with_model):
        sp.add_argument("--input", action="append", required=True,
                        help="observations/events/gates CSV; repeatable. "
                             f"'{BUILTIN_PREFIX}{houston.FIXTURE_NAME}' loads the bundled data")
        sp.add_argument("--windows", help="comma-separated window labels (YYYY-Qn, YYYY-MM, YYYY)")
        if with_model:
            sp.add_argument("--model", choices=MODELS + ("validate", "all"), default="all")
        sp.add_argument("--format", choices=FORMATS, default="table")
        sp.add_argument("--yard-capacity", type=float, default=DEFAULT_YARD_CAPACITY)
        sp.add_argument("--unstable-windows",
                        help="comma-separated windows to annotate as unstable and leave "
                             "out of capacity summaries")
        sp.add_argument("--eps-stab", type=float, default=EPS_STAB)
        sp.add_argument("--near-critical", type=float, default=NEAR_CRITICAL_RHO)
        sp.add_argument("--output", help="write the report here instead of stdout")

    data_flags(sub.add_parser("estimate", help="solve capacity models per window"), True)
    data_flags(sub.add_parser("validate", help="yard-utilization validation per window"), False)

    sp = sub.add_parser("simulate", help="run the discrete-event oracle")
    sp.add_argument("--config", help="JSON file with SimConfig fields")
    sp.add_argument("--topology", choices=TOPOLOGIES)
    sp.add_argument("--arrival-rates", help="comma list, optionally name=rate")
    sp.add_argument("--service-rates", help="comma list; gate,holding,yard for the tandem")
    sp.add_argument("--batch", help="deterministic:K | geometric:MEAN | empirical:k=p,k=p")
    sp.add_argument("--gate-count", type=int)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--warmup", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--format", choices=FORMATS, default="table")
    sp.add_argument("--output")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = make_parser()
    args = parser.parse_args(argv)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        if args.command == "simulate":
            try:
                sim = _sim_config(args)
            except PortCapError as exc:
                parser.error(str(exc))
            return cmd_simulate(sim, args.format, out)
        cfg = RunConfig(inputs=args.input, windows=_labels(args.windows),
                        model=getattr(args, "model", "validate"), fmt=args.format,
                        yard_capacity=args.yard_capacity, eps_stab=args.eps_stab,
                        near_critical=args.near_critical,
                        unstable_windows=_labels(args.unstable_windows))
        if args.command == "validate":
            return cmd_validate(cfg, out)
        return cmd_estimate(cfg, out)
    except (PortCapError, OSError, ValueError) as exc:
        print(f"portcap: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
