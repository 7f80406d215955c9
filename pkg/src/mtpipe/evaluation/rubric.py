"""Judge prompt construction and score extraction.

The prompt is a fixed English template: a task statement, the 0-5
scale, three evaluation-criteria paragraphs, up to five numbered
sample blocks, and a closing form that asks for the score only. Its
exact bytes are load-bearing (golden-file tested); edit with care.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from ..errors import DataError

MAX_BATCH = 5

_PREAMBLE = (
    "You will be given two sentences, translated sentence is translated from source"
    " sentence, reference sentence is the ground truth of translation.",
    "Your task is to rate the translation result between translated sentence and"
    " reference sentence.",
    "Assign a score for translation result on a scale of 0 to 5, where 0 is the"
    " lowest and 5 is the highest based on the Evaluation Criteria.",
    "Evaluation Criteria:",
    "Semantic similarity refers to the measurement of how similar or related two"
    " sentences are in terms of their meaning or semantics. It focuses on capturing"
    " the similarity in the underlying concepts, ideas, or information conveyed by"
    " the sentences, rather than just the surface-level lexical or syntactic"
    " similarities.",
    "The translated sentence can completely express the meaning of the reference"
    " sentence. The closer the translated sentence is to the reference sentence,"
    " the higher the score.",
    "The style of the translated sentence should be as consistent as possible with"
    " the reference sentence",
)

_CLOSING = (
    "Evaluation Form (Please output score ONLY):",
    "-Overall rating",
)


def build_rubric_prompt(batch: Sequence[tuple[str, str]]) -> str:
    """Render the judge prompt for 1 to 5 (hypothesis, reference) pairs."""
    if not batch:
        raise DataError("rubric batch is empty")
    if len(batch) > MAX_BATCH:
        raise DataError(f"rubric batch holds {len(batch)} samples, the layout caps at {MAX_BATCH}")
    parts = list(_PREAMBLE)
    for i, (hypothesis, reference) in enumerate(batch, start=1):
        parts.append(f"Sample {i}:")
        parts.append(f"Translated Sentence: {hypothesis}")
        parts.append(f"Reference Sentence: {reference}")
    parts.extend(_CLOSING)
    return "\n\n".join(parts)


@dataclass(frozen=True)
class ParsedScores:
    values: tuple[float, ...]
    overall: bool  # a single batch-level number was replicated to every sample


_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


def parse_scores(response: str, expected: int) -> ParsedScores:
    """Pull scores out of a judge reply.

    Accepts either ``expected`` numbers (one per sample) or exactly one
    number, treated as an overall batch rating and replicated. Anything
    else, or any value off the 0-5 scale, is an error.
    """
    if expected < 1:
        raise DataError(f"expected score count must be positive, got {expected}")
    found = [float(m) for m in _NUMBER.findall(response)]
    if not found:
        raise DataError(f"no score found in judge response: {response!r}")
    if len(found) == expected:
        values, overall = found, False
    elif len(found) == 1:
        values, overall = found * expected, True
    else:
        raise DataError(
            f"judge response holds {len(found)} numbers, wanted {expected} or a single overall rating"
        )
    for value in values:
        if not 0 <= value <= 5:
            raise DataError(f"score {value} outside the 0-5 scale")
    return ParsedScores(tuple(values), overall)
