"""Closed-form queue values matching each simulated stage, for side-by-side checks."""
from __future__ import annotations

from ..anchorage import anchorage_mean_wait
from ..errors import UnstableRegimeError
from ..terminal_export import export_queue_length
from ..terminal_import import BatchMoments, import_dwell, import_queue_length
from .config import BATCH, MULTICLASS, SimConfig


def mm1_queue_wait(lam: float, mu: float) -> float:
    return lam / (mu * (mu - lam))


def mms_queue_wait(lam: float, mu: float, servers: int) -> float:
    """Erlang-C mean wait in queue for M/M/s."""
    a = lam / mu
    if a >= servers:
        raise UnstableRegimeError(f"unstable M/M/{servers} (offered load {a:.6g})")
    b = 1.0
    for k in range(1, servers + 1):
        b = a * b / (k + a * b)
    c = servers * b / (servers - a * (1.0 - b))
    return c / (servers * mu - lam)


def analytic_values(cfg: SimConfig) -> dict[str, dict[str, float] | None]:
    """``{stage: {"mean_wait": W, "queue_length": L}}``; ``None`` for unstable stages."""
    out = {}
    lams = cfg.arrival_rates
    total = sum(lams.values())
    try:
        if cfg.topology == MULTICLASS:
            w = anchorage_mean_wait(lams, cfg.service_rates[0])
            out["server"] = {"mean_wait": w, "queue_length": total * w}
            for name, lam in lams.items():
                out[name] = {"mean_wait": w, "queue_length": lam * w}
            return out
        if cfg.topology == BATCH:
            batch = BatchMoments(*cfg.batch.moments())
            mu = cfg.service_rates[0]
            out["server"] = {"mean_wait": import_dwell(total, batch, mu),
                             "queue_length": import_queue_length(total, batch, mu)}
            return out
    except UnstableRegimeError:
        return {"server": None}
    g, h, y = cfg.service_rates
    for stage, fn in (("gate", lambda: mms_queue_wait(total, g, int(cfg.gate_count))),
                      ("holding", lambda: mm1_queue_wait(total, h) if total < h else None),
                      ("yard", lambda: mm1_queue_wait(total, y) if total < y else None)):
        try:
            w = fn()
        except UnstableRegimeError:
            w = None
        out[stage] = None if w is None else {"mean_wait": w, "queue_length": total * w}
    if out["yard"] is not None:
        out["yard"]["queue_length"] = export_queue_length(total, y)
    return out
