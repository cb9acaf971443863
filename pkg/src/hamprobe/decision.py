"""Tester verdicts and their JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

CLOSE, FAR, UNDECIDED = "close", "far", "undecided"


def two_sided(gamma: float, accept: float, reject: float) -> str:
    """close if gamma >= accept, far if gamma <= reject, undecided in between."""
    if gamma >= accept:
        return CLOSE
    if gamma <= reject:
        return FAR
    return UNDECIDED


def one_sided(stat: float, far_at: float) -> str:
    """far iff stat >= far_at."""
    return FAR if stat >= far_at else CLOSE


@dataclass
class Decision:
    protocol: str
    verdict: str
    gamma: float
    thresholds: dict
    ledger: dict
    seed: object = None
    generators: list[str] = field(default_factory=list)
    clamped: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def close(self) -> bool:
        return self.verdict == CLOSE

    @property
    def far(self) -> bool:
        return self.verdict == FAR

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_jsonable)


def _jsonable(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if hasattr(obj, "label"):
        return obj.label
    return str(obj)
