"""Report containers and the table / csv / json renderers.

Rows hold full-precision values; only the ``table`` renderer rounds, to
two decimals for rates, intensities, waits and percents and to whole units
for queue lengths.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

FORMATS = ("table", "csv", "json")

_INTEGER_COLUMNS = {"predicted_queue_length", "import_queue_length", "export_queue_length",
                    "total_queue_length", "arrivals"}
_SHORT_NAMES = {
    "service_rate": "mu", "traffic_intensity": "rho", "predicted_wait": "W_calc",
    "predicted_queue_length": "L_calc", "observed_wait": "W_obs", "relative_error": "err_%",
    "import_queue_length": "L_import", "export_queue_length": "L_export",
    "total_queue_length": "L_total", "calculated_utilization": "Y_calc_%",
    "observed_utilization": "Y_obs_%",
}


@dataclass
class Section:
    name: str
    columns: tuple[str, ...]
    rows: list[dict]
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "columns": list(self.columns),
                "rows": [dict(r) for r in self.rows], "summary": dict(self.summary)}


@dataclass
class Report:
    sections: list[Section]

    def to_dict(self) -> dict:
        return {"sections": [s.to_dict() for s in self.sections]}


def _cell(column: str, value, row: dict) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else ""
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if not isinstance(value, float):
        return str(value)
    if column == "traffic_intensity" and row.get("model") == "export" and value > 0.999:
        return "≈1"
    if column in _INTEGER_COLUMNS:
        return f"{value:.0f}"
    if column == "traffic_intensity" and row.get("model") == "anchorage":
        return f"{value:.3f}"
    if abs(value) >= 1e5:
        return f"{value:.4g}"
    return f"{value:.2f}" if abs(value) >= 0.01 or value == 0 else f"{value:.4g}"


def render_table(report: Report) -> str:
    out = []
    for sec in report.sections:
        cols = [c for c in sec.columns if c not in ("annotated_unstable", "message", "model")]
        header = [_SHORT_NAMES.get(c, c) for c in cols]
        body = []
        for row in sec.rows:
            cells = [_cell(c, row.get(c), row) for c in cols]
            if row.get("annotated_unstable"):
                cells[0] += "*"
            body.append(cells)
        widths = [max([len(h)] + [len(r[i]) for r in body]) for i, h in enumerate(header)]
        out.append(f"== {sec.name} ==")
        out.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
        out.extend("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in body)
        if any(row.get("annotated_unstable") for row in sec.rows):
            out.append("* window annotated as unstable; excluded from the summary")
        out.extend(f"note {row.get('window', row.get('queue'))}: {row['message']}"
                   for row in sec.rows if row.get("message"))
        for key, value in sec.summary.items():
            out.append(f"{key}: {_cell(key, value, {})}")
        out.append("")
    return "\n".join(out)


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def render_csv(report: Report) -> str:
    """One CSV block per section, each preceded by a ``# <section>`` line."""
    buf = io.StringIO()
    for i, sec in enumerate(report.sections):
        if i:
            buf.write("\n")
        buf.write(f"# {sec.name}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(sec.columns)
        for row in sec.rows:
            w.writerow([_csv_value(row.get(c)) for c in sec.columns])
    return buf.getvalue()


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "table":
        return render_table(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    raise ValueError(f"unknown format {fmt!r}")
