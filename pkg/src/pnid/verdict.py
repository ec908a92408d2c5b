"""Three-valued check outcomes shared by all analyses.

The target properties are undecidable in general, so every checker returns
Holds, Violated (with a replayable witness trace where possible), or
Inconclusive when an exploration bound got in the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional

from .core import FiringEvent


class Status(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: str = ""
    witness: tuple[FiringEvent, ...] = ()
    detail: Mapping[str, Any] = field(default_factory=dict)

    @staticmethod
    def holds(reason: str = "", **detail) -> "Verdict":
        return Verdict(Status.HOLDS, reason, (), detail)

    @staticmethod
    def violated(reason: str, witness=(), **detail) -> "Verdict":
        return Verdict(Status.VIOLATED, reason, tuple(witness), detail)

    @staticmethod
    def inconclusive(reason: str, **detail) -> "Verdict":
        return Verdict(Status.INCONCLUSIVE, reason, (), detail)

    def __bool__(self) -> bool:
        return self.status is Status.HOLDS

    def __str__(self) -> str:
        text = self.status.value
        if self.reason:
            text += f": {self.reason}"
        if self.witness:
            text += " | trace: " + "; ".join(str(e) for e in self.witness)
        return text
