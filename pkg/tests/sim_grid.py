"""Random stable simulator configurations for the analytic-coverage check.

The grid is drawn from a fixed seed so the configurations are chosen
before any simulation outcome is seen. Horizons scale with the M/M/1
relaxation time so each of the 20 batch-means bins spans many of them.
"""
import math

import numpy as np

from portcap.sim import SimConfig, analytic_values, run_simulation

GRID_SEED = 20240611
N_CONFIGS = 20
RELAX_MULT = 2000.0
MIN_EVENTS = 5e4


def _relax(mu, rho):
    return 1.0 / (mu * (1.0 - math.sqrt(rho)) ** 2)


def grid(topology: str, n: int = N_CONFIGS, seed: int = GRID_SEED) -> list[SimConfig]:
    rng = np.random.default_rng([seed, ("multiclass-single-server", "batch-single-server",
                                        "tandem-export").index(topology)])
    out = []
    for i in range(n):
        rho = float(rng.uniform(0.3, 0.8))
        mu = float(rng.uniform(0.5, 5.0))
        if topology == "multiclass-single-server":
            k = int(rng.integers(1, 5))
            share = rng.dirichlet(np.ones(k))
            rates = {f"c{j}": float(rho * mu * s) for j, s in enumerate(share)}
            lam = rho * mu
            horizon = max(MIN_EVENTS / lam, RELAX_MULT * _relax(mu, rho))
            cfg = dict(arrival_rates=rates, service_rates=[mu])
        elif topology == "batch-single-server":
            kind = ("deterministic", "geometric", "empirical")[i % 3]
            if kind == "deterministic":
                batch = {"kind": kind, "size": int(rng.integers(1, 6))}
            elif kind == "geometric":
                batch = {"kind": kind, "mean": float(rng.uniform(1.0, 4.0))}
            else:
                sizes = rng.choice(np.arange(1, 9), size=3, replace=False)
                p = rng.dirichlet(np.ones(3))
                p[-1] = 1.0 - p[:-1].sum()
                batch = {"kind": kind, "pmf": [[int(s), float(q)] for s, q in zip(sizes, p)]}
            cfg = dict(arrival_rates={"c0": 1.0}, service_rates=[mu], batch=batch)
            mean, second = SimConfig.from_dict(dict(
                topology=topology, horizon=1.0, **cfg)).batch.moments()
            lam = rho * mu / mean
            cfg["arrival_rates"] = {"c0": lam}
            k_factor = (mean + second) / (2 * mean)
            horizon = max(MIN_EVENTS / lam, RELAX_MULT * k_factor * _relax(mu, rho))
        else:
            servers = int(rng.integers(1, 5))
            lam = rho * mu
            rho_h, rho_y = rng.uniform(0.3, 0.8, size=2)
            rates = [lam / (servers * rho), lam / rho_h, lam / rho_y]
            slowest = max(_relax(lam / r, r) for r in (rho, rho_h, rho_y))
            horizon = max(MIN_EVENTS / lam, RELAX_MULT * slowest)
            cfg = dict(arrival_rates={"c0": lam}, service_rates=rates, gate_count=servers)
        out.append(SimConfig.from_dict(dict(
            topology=topology, horizon=horizon * 1.05, warmup=horizon * 0.05,
            seed=int(rng.integers(0, 2**63)), **cfg)))
    return out


def coverage(topology: str, configs=None) -> dict[str, int]:
    """Per queue: number of configs whose analytic W (resp. L) lies in the 95% CI."""
    counts: dict[str, int] = {}
    for cfg in configs or grid(topology):
        res = run_simulation(cfg)
        ana = analytic_values(cfg)
        for stage, st in res.stages.items():
            a = ana[stage]
            for key, val, hw in (("W", st.mean_wait, st.wait_half_width),
                                 ("L", st.queue_length, st.queue_length_half_width)):
                name = f"{stage}:{key}"
                hit = abs(a["mean_wait" if key == "W" else "queue_length"] - val) <= hw
                counts[name] = counts.get(name, 0) + int(hit)
    return counts
