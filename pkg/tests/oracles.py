"""Independent reference computations used by the tests.

These solve truncated continuous-time Markov chains numerically, so they
share no algebra with the closed forms under test.
"""
import numpy as np


def _stationary(q: np.ndarray) -> np.ndarray:
    # pi Q = 0 with one balance equation swapped for sum(pi) = 1
    a = q.T.copy()
    a[-1] = 1.0
    b = np.zeros(q.shape[0])
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def batch_mm1_queue(lam: float, pmf: dict[int, float], mu: float, cap: int) -> tuple[float, float]:
    """Mean number waiting (not in service) and busy probability for a
    batch-Poisson single server, truncated at ``cap`` units (overflow dropped)."""
    q = np.zeros((cap + 1, cap + 1))
    for n in range(cap + 1):
        for k, p in pmf.items():
            if n + k <= cap:
                q[n, n + k] += lam * p
        if n > 0:
            q[n, n - 1] += mu
        q[n, n] = -q[n].sum()
    pi = _stationary(q)
    n = np.arange(cap + 1)
    busy = 1.0 - pi[0]
    return float(pi @ np.maximum(n - 1, 0)), float(busy)


def mm1_queue(lam: float, mu: float, cap: int = 2000) -> float:
    return batch_mm1_queue(lam, {1: 1.0}, mu, cap)[0]


def mms_queue(lam: float, mu: float, servers: int, cap: int = 400) -> float:
    q = np.zeros((cap + 1, cap + 1))
    for n in range(cap + 1):
        if n < cap:
            q[n, n + 1] = lam
        if n > 0:
            q[n, n - 1] = mu * min(n, servers)
        q[n, n] = -q[n].sum()
    pi = _stationary(q)
    n = np.arange(cap + 1)
    return float(pi @ np.maximum(n - servers, 0))


def geometric_pmf(mean: float, kmax: int) -> dict[int, float]:
    p = 1.0 / mean
    ks = np.arange(1, kmax + 1)
    w = p * (1 - p) ** (ks - 1)
    w /= w.sum()
    return {int(k): float(v) for k, v in zip(ks, w)}
