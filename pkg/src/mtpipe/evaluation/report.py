"""Per-direction aggregation and cross-system comparison tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from ..errors import DataError
from .items import RubricScore


@dataclass(frozen=True)
class DirectionAggregate:
    direction: str
    mean: float
    scored: int
    missing: int


def aggregate(scores: Sequence[RubricScore | float | None], direction: str) -> DirectionAggregate:
    """Mean over the scores that exist; missing entries are counted, not imputed."""
    present = [s.value if isinstance(s, RubricScore) else s for s in scores if s is not None]
    missing = len(scores) - len(present)
    if not present:
        raise DataError(f"no scores to aggregate for {direction}")
    return DirectionAggregate(direction, sum(present) / len(present), len(present), missing)


@dataclass(frozen=True)
class SystemReport:
    """One system's per-direction scores (BLEU or rubric means)."""

    system: str
    scores: dict[str, float]
    sentence_counts: dict[str, int] | None = None

    def __post_init__(self):
        if not self.system:
            raise DataError("system name is empty")
        if self.sentence_counts is not None:
            for direction in self.scores:
                if self.sentence_counts.get(direction, 0) <= 0:
                    raise DataError(f"{self.system} reports {direction} without sentences")


@dataclass(frozen=True)
class ComparisonReport:
    systems: tuple[str, ...]
    sort_by: str
    directions: tuple[str, ...]  # row order: descending by the sort system
    scores: dict[str, dict[str, float]]
    omitted: dict[str, tuple[str, ...]]
    wins: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)

    def to_tsv(self) -> str:
        lines = ["direction\t" + "\t".join(self.systems) + "\n"]
        for d in self.directions:
            row = "\t".join(str(self.scores[s][d]) for s in self.systems)
            lines.append(f"{d}\t{row}\n")
        return "".join(lines)

    def series(self) -> dict[str, list[float]]:
        """Row-aligned score lists per system, ready for plotting."""
        return {s: [self.scores[s][d] for d in self.directions] for s in self.systems}

    def to_figure_json(self) -> str:
        payload = {
            "directions": list(self.directions),
            "series": self.series(),
            "sort_by": self.sort_by,
            "wins": {f"{a}>{b}": list(ds) for (a, b), ds in sorted(self.wins.items())},
        }
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def comparison_report(reports: Sequence[SystemReport], sort_by: str) -> ComparisonReport:
    """Line systems up on their shared directions.

    Rows are ordered by the chosen system's score, best first (ties by
    direction name). Directions a system reports beyond the shared set
    are listed under ``omitted``; ``wins[(a, b)]`` holds the directions
    where a strictly beats b.
    """
    if not reports:
        raise DataError("no system reports to compare")
    names = [r.system for r in reports]
    if len(set(names)) != len(names):
        raise DataError("duplicate system names in comparison")
    if sort_by not in names:
        raise DataError(f"sort_by system {sort_by!r} not among {names}")
    common = set(reports[0].scores)
    for report in reports[1:]:
        common &= set(report.scores)
    if not common:
        raise DataError("systems share no directions")
    omitted = {
        r.system: tuple(sorted(set(r.scores) - common))
        for r in reports
        if set(r.scores) - common
    }
    anchor = next(r for r in reports if r.system == sort_by)
    order = tuple(sorted(common, key=lambda d: (-anchor.scores[d], d)))
    scores = {r.system: {d: r.scores[d] for d in order} for r in reports}
    wins: dict[tuple[str, str], tuple[str, ...]] = {}
    for a in reports:
        for b in reports:
            if a.system == b.system:
                continue
            wins[(a.system, b.system)] = tuple(
                d for d in order if a.scores[d] > b.scores[d]
            )
    return ComparisonReport(tuple(names), sort_by, order, scores, omitted, wins)


def load_score_table(path: str | Path) -> list[SystemReport]:
    """Read a direction-by-system TSV into one report per system column."""
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read score table {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2:
        raise DataError(f"score table {path} has no data rows")
    header = lines[0].split("\t")
    if header[0] != "direction" or len(header) < 2:
        raise DataError(f"score table {path} must start with a direction column")
    systems = header[1:]
    scores: dict[str, dict[str, float]] = {s: {} for s in systems}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        direction = fields[0]
        for system, raw in zip(systems, fields[1:]):
            try:
                scores[system][direction] = float(raw)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad score {raw!r}") from exc
    return [SystemReport(s, scores[s]) for s in systems]


def bundled_bleu_reports() -> list[SystemReport]:
    """The shipped 104-direction BLEU comparison across three systems."""
    with resources.as_file(resources.files("mtpipe.data") / "bleu_scores.tsv") as p:
        return load_score_table(p)


def bundled_gpt4_reports() -> list[SystemReport]:
    """The shipped 70-direction judge-score comparison across three systems."""
    with resources.as_file(resources.files("mtpipe.data") / "gpt4_scores.tsv") as p:
        return load_score_table(p)
