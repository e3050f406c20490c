import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import mm1_queue
from portcap.anchorage import (AnchorageObservation, ClassQueue, anchorage_mean_wait,
                               anchorage_queue_lengths, solve_port_capacity)
from portcap.errors import DegenerateObservationError, UnstableRegimeError
from portcap.units import Duration, Window

WIN = Window.from_label("2023-Q1")


def obs(lams, ls, wait=None):
    per = {f"c{i}": ClassQueue(lam, q) for i, (lam, q) in enumerate(zip(lams, ls))}
    return AnchorageObservation(WIN, per, None if wait is None else Duration(wait))


def test_wait_matches_ctmc_queue():
    # queue length of the pooled birth-death chain, by Little's law
    for lam, mu in [(0.3, 1.0), (0.7, 1.0), (0.78, 0.8)]:
        cap = 600 if lam / mu < 0.9 else 4000
        assert anchorage_mean_wait([lam], mu) == pytest.approx(mm1_queue(lam, mu, cap) / lam,
                                                               rel=1e-6)


def test_classes_pool_into_one_server():
    assert anchorage_mean_wait([0.1, 0.2, 0.4], 1.0) == pytest.approx(
        anchorage_mean_wait([0.7], 1.0), rel=1e-15)


def test_queue_lengths_follow_littles_law():
    rates = {"a": 0.09, "b": 0.17, "c": 0.52}
    w = anchorage_mean_wait(rates, 0.8)
    ls = anchorage_queue_lengths(rates, 0.8)
    assert set(ls) == set(rates)
    for k in rates:
        assert ls[k] == pytest.approx(rates[k] * w, rel=1e-15)
    assert isinstance(anchorage_queue_lengths([0.1, 0.2], 1.0), list)


@pytest.mark.parametrize("mu", [0.78, 0.5, 0.78 / (1 - 1e-7)])
def test_unstable_regime(mu):
    with pytest.raises(UnstableRegimeError, match="unstable anchorage regime"):
        anchorage_mean_wait([0.09, 0.17, 0.52], mu)


def test_exact_observation_recovers_rate():
    lams = [0.09, 0.17, 0.52]
    ls = anchorage_queue_lengths(lams, 0.8)
    est = solve_port_capacity(obs(lams, ls))
    assert est.service_rate == pytest.approx(0.8, rel=1e-12)
    assert est.residual < 1e-20
    assert est.traffic_intensity == pytest.approx(0.78 / 0.8)


def test_closed_form_and_search_agree(houston):
    for b in houston.values():
        a = solve_port_capacity(b.anchorage, method="closed-form").service_rate
        m = solve_port_capacity(b.anchorage, method="minimize").service_rate
        assert a == pytest.approx(m, rel=1e-9)


def test_fit_minimises_squared_error():
    lams, ls = [0.1, 0.2, 0.5], [3.0, 7.0, 21.0]
    est = solve_port_capacity(obs(lams, ls))

    def sse(mu):
        return sum((lam * anchorage_mean_wait(lams, mu) - q) ** 2 for lam, q in zip(lams, ls))

    for d in (1e-4, -1e-4):
        assert sse(est.service_rate) <= sse(est.service_rate + d)


def test_relative_error_is_signed():
    lams = [0.2, 0.3]
    ls = anchorage_queue_lengths(lams, 1.0)
    w = anchorage_mean_wait(lams, 1.0)
    est = solve_port_capacity(obs(lams, ls, wait=w * 1.25))
    assert est.observed_wait_relative_error == pytest.approx(-20.0)
    assert solve_port_capacity(obs(lams, ls)).observed_wait_relative_error is None


def test_degenerate_inputs():
    with pytest.raises(DegenerateObservationError, match="degenerate"):
        solve_port_capacity(obs([0.1, 0.2], [0.0, 0.0]))
    with pytest.raises(DegenerateObservationError):
        solve_port_capacity(obs([0.0, 0.2], [4.0, 0.0]))
    with pytest.raises(DegenerateObservationError):
        obs([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(DegenerateObservationError):
        AnchorageObservation(WIN, {})
    with pytest.raises(ValueError):
        solve_port_capacity(obs([0.1], [1.0]), method="newton")


def test_no_stable_fit_when_queues_are_huge():
    # W* so large that the fitted rho sits within eps of one
    with pytest.raises(UnstableRegimeError, match="no stable fit"):
        solve_port_capacity(obs([0.5], [1e9]), eps=1e-6)


rates = st.lists(st.floats(0.01, 5.0), min_size=1, max_size=5)


@settings(max_examples=200, deadline=None)
@given(rates, st.floats(1.0001, 50.0))
def test_solver_recovers_true_rate(lams, factor):
    mu = sum(lams) * factor
    ls = anchorage_queue_lengths(lams, mu)
    est = solve_port_capacity(obs(lams, ls))
    assert est.service_rate == pytest.approx(mu, rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(rates, st.floats(1.001, 50.0), st.floats(1.0001, 2.0))
def test_wait_decreases_in_service_rate(lams, factor, bump):
    mu = sum(lams) * factor
    assert anchorage_mean_wait(lams, mu * bump) < anchorage_mean_wait(lams, mu)


@settings(max_examples=200, deadline=None)
@given(rates, st.floats(1.001, 50.0))
def test_round_trip(lams, factor):
    mu = sum(lams) * factor
    w = anchorage_mean_wait(lams, mu)
    est = solve_port_capacity(obs(lams, [lam * w for lam in lams]))
    assert est.predicted_wait == pytest.approx(w, rel=1e-8)
    for q, lam in zip(est.predicted_queue_lengths.values(), lams):
        assert q == pytest.approx(lam * est.predicted_wait, rel=1e-12)
