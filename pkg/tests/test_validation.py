import math

import pytest

from portcap.errors import ConfigError
from portcap.terminal_export import ExportCapacityEstimate
from portcap.terminal_import import ImportCapacityEstimate
from portcap.units import Window
from portcap.validation import (NEAR_CRITICAL, STABLE, UNSTABLE_EXPORT, UNSTABLE_IMPORT,
                                estimate_yard_capacity, relative_error, stability_flag,
                                summarize_capacity, validate_window)

WIN = Window.from_label("2023-Q2")


def imp(L, rho=0.87):
    return ImportCapacityEstimate(61.29, rho, L, 80.0)


def exp(L, rho=0.9999):
    return ExportCapacityEstimate(72.35, rho, L)


def test_yard_capacity_from_inventory():
    assert estimate_yard_capacity(18906, 0.75).capacity == pytest.approx(25208)
    for inv, u in [(0, 0.5), (100, 0.0), (100, 1.2)]:
        with pytest.raises(ConfigError):
            estimate_yard_capacity(inv, u)


def test_window_row():
    row = validate_window(WIN, imp(4388.0), exp(14029.0), 25208, 73.70)
    assert row.total_queue_length == 18417.0
    assert row.calculated_utilization == pytest.approx(18417 / 25208 * 100)
    assert row.relative_error == pytest.approx((row.calculated_utilization - 73.70) / 73.70 * 100)
    assert row.stability_flag == NEAR_CRITICAL


def test_missing_observation_has_no_error():
    row = validate_window(WIN, imp(10.0), exp(10.0), 100.0, None)
    assert row.relative_error is None
    assert relative_error(5.0, 0.0) is None
    assert relative_error(5.0, math.nan) is None


def test_zero_queue_total():
    row = validate_window(WIN, imp(0.0), exp(0.0), 100.0, 50.0)
    assert row.calculated_utilization == 0.0
    assert row.relative_error == -100.0


def test_bad_capacity():
    with pytest.raises(ConfigError):
        validate_window(WIN, imp(1.0), exp(1.0), 0.0, None)


@pytest.mark.parametrize("ri,re,flag", [
    (0.5, 0.5, STABLE),
    (1.0, 0.5, UNSTABLE_IMPORT),
    (0.5, 1 - 1e-7, UNSTABLE_EXPORT),
    (0.5, 0.9995, NEAR_CRITICAL),
    (0.9995, 0.5, NEAR_CRITICAL),
])
def test_stability_flag(ri, re, flag):
    assert stability_flag(ri, re) == flag


def test_summary_uses_sample_sd():
    mean, sd = summarize_capacity([1.0, 2.0, 3.0])
    assert (mean, sd) == (2.0, 1.0)
    assert math.isnan(summarize_capacity([])[0])
    assert math.isnan(summarize_capacity([4.0])[1])
