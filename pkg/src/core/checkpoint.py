"""
Checkpoint files for resumable searches

A checkpoint is JSON lines: a header with the format version and the SHA-256
of the problem description, then one record per finished work unit.
"""

import hashlib
import json
import logging
import os
import time
from typing import Dict

from src.core.errors import ChecksumMismatch, ParseError

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def problem_hash(description: dict) -> str:
    """SHA-256 of the canonical JSON form of a problem description"""
    return hashlib.sha256(canonical_json(description).encode("utf-8")).hexdigest()


class CheckpointManager:
    """Collects finished unit records and flushes them to disk periodically"""

    def __init__(self, path: str, description: dict, interval_s: float = 60.0):
        self.path = path
        self.digest = problem_hash(description)
        self.interval_s = interval_s
        self.records: Dict[int, dict] = {}
        self._last_save = time.time()
        self._dirty = False

    def load(self) -> Dict[int, dict]:
        """Read an existing checkpoint; refuses one written for another problem"""
        if not os.path.exists(self.path):
            return {}
        with open(self.path, "r") as f:
            lines = [line for line in f if line.strip()]
        if not lines:
            return {}
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError:
            raise ParseError("checkpoint header is not JSON", 1)
        if header.get("version") != CHECKPOINT_VERSION:
            raise ChecksumMismatch(f"checkpoint version {header.get('version')} "
                                   f"is not {CHECKPOINT_VERSION}")
        if header.get("problem_hash") != self.digest:
            raise ChecksumMismatch("checkpoint was written for a different problem")
        for lineno, line in enumerate(lines[1:], 2):
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise ParseError("checkpoint record is not JSON", lineno)
            self.records[int(record["index"])] = record
        logger.info(f"Resuming from {self.path}: {len(self.records)} units already done")
        return dict(self.records)

    def record(self, unit: dict):
        self.records[int(unit["index"])] = unit
        self._dirty = True
        if time.time() - self._last_save >= self.interval_s:
            self.save()

    def save(self):
        tmp = self.path + ".tmp"
        with open(tmp, "w") as f:
            f.write(canonical_json({"version": CHECKPOINT_VERSION,
                                    "problem_hash": self.digest}) + "\n")
            for index in sorted(self.records):
                f.write(canonical_json(self.records[index]) + "\n")
        os.replace(tmp, self.path)
        self._last_save = time.time()
        self._dirty = False
        logger.info(f"Checkpoint saved: {len(self.records)} units -> {self.path}")

    def close(self):
        if self._dirty:
            self.save()
