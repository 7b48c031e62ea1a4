"""
Application configuration management
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from typing import Optional

from src.core.errors import UsageError

logger = logging.getLogger(__name__)

JOBS_ENV = "TERNARY_JOBS"
COLUMN_ORDERS = ("descending", "ascending", "given")


@dataclass
class SearchConfig:
    """Feasibility search limits and strategy"""
    node_budget: int = 10 ** 9
    time_budget_s: float = 3600.0  # seconds
    checkpoint_interval_s: float = 60.0  # seconds
    column_order: str = "descending"  # by norm; descending, ascending, given
    symmetry_reduction: bool = True
    classify_cap: int = 10_000  # witnesses kept before flagging saturation
    progress_interval_s: float = 10.0  # seconds


@dataclass
class VerifyConfig:
    """Box verification of universality"""
    trace_bound: int = 60
    norm_bound: Optional[int] = None
    chunk_size: int = 1  # outer coordinates per worker task


@dataclass
class BoundsConfig:
    """Discriminant bound evaluation"""
    gamma2_mode: int = 7  # 7, or 5 for the variant convention at p = 2


@dataclass
class RuntimeConfig:
    """Process-level settings"""
    jobs: int = 1
    log_level: str = "INFO"


def default_jobs() -> int:
    value = os.environ.get(JOBS_ENV)
    if not value:
        return 1
    try:
        jobs = int(value)
    except ValueError:
        raise UsageError(f"{JOBS_ENV}={value!r} is not an integer")
    if jobs < 1:
        raise UsageError(f"{JOBS_ENV} must be at least 1")
    return jobs


def _section(cls, data: dict, name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    return cls(**data)


class AppConfig:
    """Main application configuration"""

    SECTIONS = {
        "search": SearchConfig,
        "verify": VerifyConfig,
        "bounds": BoundsConfig,
        "runtime": RuntimeConfig,
    }

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.search = SearchConfig()
        self.verify = VerifyConfig()
        self.bounds = BoundsConfig()
        self.runtime = RuntimeConfig(jobs=default_jobs())
        if config_file:
            self.load_config()
        self.validate()

    def load_config(self):
        """Load configuration from file"""
        if not os.path.exists(self.config_file):
            raise UsageError(f"config file {self.config_file} does not exist")
        try:
            with open(self.config_file, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise UsageError(f"config file {self.config_file} is not valid JSON: {e}")
        unknown = set(data) - set(self.SECTIONS)
        if unknown:
            raise UsageError(f"unknown config sections: {sorted(unknown)}")
        for name, cls in self.SECTIONS.items():
            if name in data:
                setattr(self, name, _section(cls, data[name], name))
        logger.debug(f"Loaded configuration from {self.config_file}")

    def save_config(self, path: Optional[str] = None):
        """Save configuration to file"""
        data = {name: asdict(getattr(self, name)) for name in self.SECTIONS}
        with open(path or self.config_file, "w") as f:
            json.dump(data, f, indent=2)

    def validate(self):
        if self.search.column_order not in COLUMN_ORDERS:
            raise UsageError(f"column_order must be one of {COLUMN_ORDERS}")
        if self.bounds.gamma2_mode not in (5, 7):
            raise UsageError("gamma2_mode must be 5 or 7")
        if self.runtime.jobs < 1:
            raise UsageError("jobs must be at least 1")
        if self.search.node_budget < 1:
            raise UsageError("node_budget must be positive")
