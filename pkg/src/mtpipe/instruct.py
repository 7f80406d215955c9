"""Instruction-tuning dataset construction.

Every direction contributes up to ``per_direction`` uniformly sampled
pairs (all of them when the corpus is smaller). Each selected pair is
rendered through a uniformly drawn prompt template, and the combined
record list is shuffled once. Selection, template draws, and the final
shuffle all derive from one root seed, so the dataset is reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from .corpus import Direction, ParallelCorpus
from .errors import DataError
from .registry import language_name
from .seeding import derive_rng

TEMPLATE_COUNT = 28
DEFAULT_PER_DIRECTION = 1_000

_PLACEHOLDERS = ("{src_lang}", "{tgt_lang}", "{src_text}")


@dataclass(frozen=True)
class PromptTemplate:
    id: int
    text: str

    def __post_init__(self):
        for placeholder in _PLACEHOLDERS:
            if placeholder not in self.text:
                raise DataError(f"template {self.id} is missing {placeholder}")

    def render(self, direction: Direction, source: str) -> str:
        return self.text.format(
            src_lang=language_name(direction.src),
            tgt_lang=language_name(direction.tgt),
            src_text=source,
        )


@lru_cache(maxsize=1)
def prompt_templates() -> tuple[PromptTemplate, ...]:
    """The bundled template registry: 28 English prompts with ids 0..27.

    Shipped as an editable JSON data file; only the count and the
    placeholder contract are load-bearing.
    """
    raw = json.loads(
        resources.files("mtpipe.data").joinpath("prompt_templates.json").read_text("utf-8")
    )
    templates = tuple(PromptTemplate(entry["id"], entry["text"]) for entry in raw)
    if len(templates) != TEMPLATE_COUNT:
        raise DataError(f"expected {TEMPLATE_COUNT} prompt templates, found {len(templates)}")
    if [t.id for t in templates] != list(range(TEMPLATE_COUNT)):
        raise DataError("template ids must be 0..27 in file order")
    return templates


@dataclass(frozen=True)
class InstructionRecord:
    direction: Direction
    template_id: int
    instruction: str
    completion: str

    def __post_init__(self):
        if not 0 <= self.template_id < TEMPLATE_COUNT:
            raise DataError(f"template_id {self.template_id} out of range")

    def to_dict(self) -> dict:
        return {
            "direction": str(self.direction),
            "template_id": self.template_id,
            "instruction": self.instruction,
            "completion": self.completion,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "InstructionRecord":
        try:
            return cls(
                direction=Direction.parse(payload["direction"]),
                template_id=payload["template_id"],
                instruction=payload["instruction"],
                completion=payload["completion"],
            )
        except KeyError as exc:
            raise DataError(f"instruction record missing field {exc}") from exc


def build_instruction_dataset(
    train: Mapping[Direction, ParallelCorpus],
    per_direction: int = DEFAULT_PER_DIRECTION,
    seed: int = 0,
) -> list[InstructionRecord]:
    """Select, render, and shuffle instruction records for every direction.

    Directions with more than ``per_direction`` pairs are downsampled
    uniformly without replacement; smaller ones contribute everything,
    so each direction yields exactly min(available, per_direction)
    records.
    """
    if not train:
        raise DataError("no training corpora to build instructions from")
    if per_direction <= 0:
        raise DataError(f"per_direction must be positive, got {per_direction}")
    templates = prompt_templates()
    records: list[InstructionRecord] = []
    for direction in sorted(train, key=str):
        pairs = train[direction].pairs
        if len(pairs) > per_direction:
            picker = derive_rng(seed, f"instruct-select:{direction}")
            keep = sorted(picker.sample(range(len(pairs)), per_direction))
            chosen = [pairs[i] for i in keep]
        else:
            chosen = list(pairs)
        drawer = derive_rng(seed, f"instruct-template:{direction}")
        for pair in chosen:
            template = templates[drawer.randrange(TEMPLATE_COUNT)]
            records.append(
                InstructionRecord(
                    direction=direction,
                    template_id=template.id,
                    instruction=template.render(direction, pair.source),
                    completion=pair.target,
                )
            )
    derive_rng(seed, "instruct-shuffle").shuffle(records)
    return records


def write_instructions(records: list[InstructionRecord], path: str | Path) -> int:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(
                json.dumps(record.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
                + "\n"
            )
    return len(records)


def read_instructions(path: str | Path) -> list[InstructionRecord]:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read instructions {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        records.append(InstructionRecord.from_dict(payload))
    return records
