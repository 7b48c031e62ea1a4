"""
Run reports and element files
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

from src.core.errors import ParseError
from src.core.qfield import FieldCtx, QuadRat

logger = logging.getLogger(__name__)

VERSION = "1.0.0"


ENVELOPE_KEYS = ("command", "params", "wall_time_ms", "version")


@dataclass
class RunReport:
    """One JSON object per command invocation

    The outcome's keys are written next to the envelope keys, so a bounds
    report reads {"command": "bounds", "bound": 625, ...}.
    """
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    outcome: Dict[str, Any] = field(default_factory=dict)
    wall_time_ms: int = 0
    version: str = VERSION

    def to_dict(self) -> dict:
        clash = set(self.outcome) & set(ENVELOPE_KEYS)
        if clash:
            raise ValueError(f"outcome keys collide with the envelope: {sorted(clash)}")
        data = {key: value for key, value in asdict(self).items() if key != "outcome"}
        data.update(self.outcome)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        envelope = {key: data.pop(key) for key in ENVELOPE_KEYS if key in data}
        return cls(outcome=data, **envelope)


def load_elements(path: str, ctx: FieldCtx) -> List[QuadRat]:
    """One "a,b,q" element per line; blank lines and # comments are skipped"""
    out = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            out.append(QuadRat.parse(line, ctx.D, lineno))
    if not out:
        raise ParseError(f"{path} holds no elements")
    logger.debug(f"Loaded {len(out)} elements from {path}")
    return out


def save_elements(path: str, elements: List[QuadRat]):
    with open(path, "w") as f:
        for x in elements:
            f.write(x.format() + "\n")
