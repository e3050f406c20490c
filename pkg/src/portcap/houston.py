"""Bundled Port of Houston / Barbours Cut inputs, 2021 Q4 to 2023 Q4."""
from importlib import resources

from .ingest import load_observation_file

FIXTURE_NAME = "houston_2021q4_2023q4"

#: Quarters with unstable terminal queues (COVID-19 congestion at the terminal).
UNSTABLE_WINDOWS = ("2021-Q4", "2022-Q1", "2022-Q2", "2022-Q3")


def fixture_path():
    return resources.files("portcap.data") / f"{FIXTURE_NAME}.csv"


def load_houston():
    with resources.as_file(fixture_path()) as path:
        return load_observation_file(path)
