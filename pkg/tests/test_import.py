import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import batch_mm1_queue, geometric_pmf
from portcap.errors import ConfigError, UnstableRegimeError
from portcap.terminal_import import (BatchMoments, ImportObservation,
                                     batch_moments_from_mean_variance, import_dwell,
                                     import_queue_length, import_service_rate_quadratic,
                                     solve_import_capacity)
from portcap.units import Duration, Window

WIN = Window.from_label("2022-Q4")
HOUSTON_BATCH = batch_moments_from_mean_variance(851.2, 341458.56)


def make(lam, batch, dwell_hours):
    return ImportObservation(WIN, lam, batch, Duration(dwell_hours))


def test_batch_moments():
    b = HOUSTON_BATCH
    assert b.second_moment == pytest.approx(10.66e5, rel=1e-3)
    assert b.variance == pytest.approx(341458.56)
    assert b.size_factor == pytest.approx((851.2 + b.second_moment) / (2 * 851.2))
    with pytest.raises(ConfigError):
        BatchMoments(0.5, 1.0)
    with pytest.raises(ConfigError):
        BatchMoments(3.0, 8.0)
    with pytest.raises(ConfigError):
        batch_moments_from_mean_variance(2.0, -1.0)


def test_unit_batch_is_mm1_exactly():
    one = BatchMoments(1.0, 1.0)
    for lam, mu in [(0.2, 1.0), (0.9, 1.0), (3.0, 7.5), (0.056, 0.0561)]:
        wq = lam / (mu * (mu - lam))
        lq = lam * lam / (mu * (mu - lam))
        assert abs(import_dwell(lam, one, mu) - wq) / wq < 1e-12
        assert abs(import_queue_length(lam, one, mu) - lq) / lq < 1e-12


@pytest.mark.parametrize("pmf,lam,mu", [
    ({1: 1.0}, 0.6, 1.0),
    ({3: 1.0}, 0.2, 1.0),
    ({1: 0.5, 4: 0.5}, 0.25, 1.0),
    (geometric_pmf(3.0, 250), 0.2, 1.0),
])
def test_queue_length_matches_ctmc(pmf, lam, mu):
    mean = sum(k * p for k, p in pmf.items())
    second = sum(k * k * p for k, p in pmf.items())
    b = BatchMoments(mean, second)
    lq, busy = batch_mm1_queue(lam, pmf, mu, cap=1500)
    assert busy == pytest.approx(lam * mean / mu, rel=1e-6)
    assert import_queue_length(lam, b, mu) == pytest.approx(lq, rel=1e-6)
    # Little's law on cargo units
    assert import_dwell(lam, b, mu) == pytest.approx(lq / (lam * mean), rel=1e-6)


def test_bisect_and_quadratic_agree():
    for lam, w_days in [(0.045, 7.90), (0.056, 5.11), (0.063, 3.41), (0.058, 3.37)]:
        o = make(lam, HOUSTON_BATCH, w_days * 24)
        a = solve_import_capacity(o).service_rate
        b = solve_import_capacity(o, method="quadratic").service_rate
        assert a == pytest.approx(b, rel=1e-12)


def test_unstable_and_infeasible():
    with pytest.raises(UnstableRegimeError, match="unstable import regime"):
        import_dwell(0.1, HOUSTON_BATCH, 85.12)
    with pytest.raises(UnstableRegimeError, match="no feasible service rate"):
        solve_import_capacity(make(0.05, HOUSTON_BATCH, 0.0))
    with pytest.raises(ConfigError):
        make(0.0, HOUSTON_BATCH, 10.0)
    with pytest.raises(ValueError):
        solve_import_capacity(make(0.05, HOUSTON_BATCH, 10.0), method="brent")


def test_very_short_dwell_expands_bracket():
    o = make(0.01, BatchMoments(1.0, 1.0), 1e-7)
    est = solve_import_capacity(o)
    assert est.predicted_dwell == pytest.approx(1e-7, rel=1e-8)


batches = st.tuples(st.floats(1.0, 1000.0), st.floats(0.0, 4.0)).map(
    lambda mv: BatchMoments(mv[0], mv[0] ** 2 * (1 + mv[1])))


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 5.0), batches, st.floats(0.05, 0.99))
def test_recovers_true_rate(lam, batch, rho):
    mu = lam * batch.mean / rho
    w = import_dwell(lam, batch, mu)
    est = solve_import_capacity(make(lam, batch, w))
    assert est.service_rate == pytest.approx(mu, rel=1e-6)
    assert est.predicted_dwell == pytest.approx(w, rel=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 5.0), batches, st.floats(0.05, 0.98), st.floats(1.0001, 1.5))
def test_dwell_decreases_in_service_rate(lam, batch, rho, bump):
    mu = lam * batch.mean / rho
    assert import_dwell(lam, batch, mu * bump) < import_dwell(lam, batch, mu)
