"""Loading line-aligned evaluation sets and per-system hypotheses.

The evaluation directory holds one ``<code>.txt`` file per language,
line-aligned across languages. Each direction takes the first
``per_direction`` aligned lines as source/reference pairs. Hypotheses
arrive separately as one ``<src>-<tgt>.txt`` file per direction, again
line-aligned with the items.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from ..corpus import Direction
from ..errors import DataError
from .items import EvalItem

DEFAULT_PER_DIRECTION = 50


def _read_lines(path: Path) -> list[str]:
    try:
        return Path(path).read_text("utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"missing language file {path}: {exc}") from exc


def load_flores_subset(
    path: str | Path,
    directions: Iterable[Direction],
    per_direction: int = DEFAULT_PER_DIRECTION,
) -> tuple[list[EvalItem], dict[str, int]]:
    """First-N aligned sentences per direction, with a shortfall map.

    Returns the items (hypothesis left empty) plus {direction: lines
    actually available} for every direction shorter than requested.
    """
    if per_direction <= 0:
        raise DataError(f"per_direction must be positive, got {per_direction}")
    base = Path(path)
    cache: dict[str, list[str]] = {}
    items: list[EvalItem] = []
    shortfall: dict[str, int] = {}
    for direction in directions:
        for code in (direction.src, direction.tgt):
            if code not in cache:
                cache[code] = _read_lines(base / f"{code}.txt")
        src_lines = cache[direction.src]
        ref_lines = cache[direction.tgt]
        if len(src_lines) != len(ref_lines):
            raise DataError(
                f"misaligned files for {direction}: "
                f"{len(src_lines)} vs {len(ref_lines)} lines"
            )
        take = min(per_direction, len(src_lines))
        if take < per_direction:
            shortfall[str(direction)] = take
        for source, reference in zip(src_lines[:take], ref_lines[:take]):
            if not reference:
                raise DataError(f"blank reference line in {direction.tgt}.txt")
            items.append(EvalItem(direction, source, "", reference))
    return items, shortfall


def attach_hypotheses(items: Sequence[EvalItem], hyp_dir: str | Path) -> list[EvalItem]:
    """Fill each item's hypothesis from its direction's output file."""
    base = Path(hyp_dir)
    grouped: dict[str, list[int]] = {}
    for i, item in enumerate(items):
        grouped.setdefault(str(item.direction), []).append(i)
    out = list(items)
    for direction, indices in grouped.items():
        lines = _read_lines(base / f"{direction}.txt")
        if len(lines) != len(indices):
            raise DataError(
                f"{direction}.txt holds {len(lines)} hypotheses for {len(indices)} items"
            )
        for i, line in zip(indices, lines):
            item = items[i]
            out[i] = EvalItem(item.direction, item.source, line, item.reference)
    return out
