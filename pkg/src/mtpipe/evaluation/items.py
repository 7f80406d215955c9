"""Shared evaluation records: one translation to score, one judge verdict."""

from __future__ import annotations

from dataclasses import dataclass

from ..corpus import Direction
from ..errors import DataError


@dataclass(frozen=True)
class EvalItem:
    """A hypothesis/reference pair for one direction.

    ``hypothesis`` may be empty while a system's outputs have not been
    attached yet; ``reference`` never is.
    """

    direction: Direction
    source: str
    hypothesis: str
    reference: str

    def __post_init__(self):
        if not self.reference:
            raise DataError(f"empty reference for {self.direction}")


@dataclass(frozen=True)
class RubricScore:
    """One judged sentence: the 0-5 value plus provenance for auditing."""

    value: float
    judge_model: str
    raw_response: str
    overall_mode: bool = False  # True when replicated from a single batch-level number

    def __post_init__(self):
        if not 0 <= self.value <= 5:
            raise DataError(f"rubric score {self.value} outside the 0-5 scale")
