"""
Shared fixtures for the test suite
"""

import json
from pathlib import Path

import pytest

from src.core.config import SearchConfig
from src.core.qfield import make_field
from src.core.random_instances import RandomInstanceGenerator

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


@pytest.fixture
def f5():
    return make_field(5)


@pytest.fixture
def f13():
    return make_field(13)


@pytest.fixture
def f2():
    return make_field(2)


@pytest.fixture
def rng():
    return RandomInstanceGenerator(seed=20240611)


@pytest.fixture
def small_search():
    """Search limits that keep the desk-scale problems fast"""
    return SearchConfig(node_budget=2_000_000, time_budget_s=120.0, progress_interval_s=3600.0)


@pytest.fixture
def load_schema():
    def load(name: str) -> dict:
        with open(SCHEMA_DIR / f"{name}.schema.json", "r") as f:
            return json.load(f)
    return load
