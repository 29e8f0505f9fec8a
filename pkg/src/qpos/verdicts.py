"""Three-valued verdicts carried by every decision operation.

A verdict is HOLDS, FAILS (with a re-verifiable witness), or UNDECIDED at a
stated resolution.  Grid-certified HOLDS verdicts also carry the resolution
used, so a caller can always tell a proof-grade answer from a sampled one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np


class Status(str, Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Any = None
    resolution: float | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is Status.HOLDS

    @classmethod
    def holds(cls, resolution=None, **meta) -> "Verdict":
        return cls(Status.HOLDS, None, resolution, dict(meta))

    @classmethod
    def fails(cls, witness, resolution=None, **meta) -> "Verdict":
        return cls(Status.FAILS, witness, resolution, dict(meta))

    @classmethod
    def undecided(cls, resolution=None, **meta) -> "Verdict":
        return cls(Status.UNDECIDED, None, resolution, dict(meta))


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, Enum):
        return value.value
    return value


def verdict_to_json(v: Verdict) -> dict:
    return {
        "status": v.status.value,
        "witness": _jsonable(v.witness),
        "resolution": _jsonable(v.resolution),
        "meta": _jsonable(dict(v.meta)),
    }
