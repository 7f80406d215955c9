"""Parallel corpus ingestion, statistics, and direction balancing.

A corpus directory holds one UTF-8 TSV per translation direction, named
``{src}-{tgt}.tsv``, one ``source<TAB>target`` pair per line. Directions
are ordered: ``en-ro`` and ``ro-en`` are distinct.

Balancing creates the missing reverse direction for every one-way
corpus: small corpora (fewer than ``flip_threshold`` pairs) are flipped
whole, large ones contribute a seeded uniform half. Directions whose
reverse already exists are left untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import registry
from .errors import DataError
from .seeding import derive_rng

ORIGIN_ORIGINAL = "original"
ORIGIN_FLIPPED = "flipped"
ORIGIN_MIXED = "mixed"
_ORIGINS = (ORIGIN_ORIGINAL, ORIGIN_FLIPPED, ORIGIN_MIXED)

DEFAULT_FLIP_THRESHOLD = 1_000_000


@dataclass(frozen=True, order=True)
class Direction:
    """An ordered (source, target) language pair, e.g. fr->en."""

    src: str
    tgt: str

    def __post_init__(self):
        if not registry.is_known(self.src):
            raise DataError(f"unknown language code: {self.src!r}")
        if not registry.is_known(self.tgt):
            raise DataError(f"unknown language code: {self.tgt!r}")
        if self.src == self.tgt:
            raise DataError(f"direction must relate two distinct languages: {self.src!r}")

    def __str__(self) -> str:
        return f"{self.src}-{self.tgt}"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        parts = text.split("-")
        if len(parts) != 2:
            raise DataError(f"direction must look like 'src-tgt': {text!r}")
        return cls(parts[0], parts[1])

    def reverse(self) -> "Direction":
        return Direction(self.tgt, self.src)


@dataclass(frozen=True)
class SentencePair:
    source: str
    target: str

    def __post_init__(self):
        if not self.source.strip() or not self.target.strip():
            raise DataError("sentence pair has an empty side")

    def swapped(self) -> "SentencePair":
        return SentencePair(self.target, self.source)


@dataclass(frozen=True)
class ParallelCorpus:
    """All sentence pairs of one direction. Immutable; an empty pair list
    is representable in memory but is rejected on save."""

    direction: Direction
    pairs: tuple[SentencePair, ...]
    origin: str = ORIGIN_ORIGINAL

    def __post_init__(self):
        if self.origin not in _ORIGINS:
            raise DataError(f"unknown corpus origin tag: {self.origin!r}")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class CorpusStats:
    pair_counts: dict[str, int]
    skipped_lines: dict[str, int]
    origins: dict[str, str]
    total_pairs: int = field(default=0)

    @classmethod
    def collect(
        cls,
        corpora: dict[Direction, ParallelCorpus],
        skipped: dict[Direction, int] | None = None,
    ) -> "CorpusStats":
        skipped = skipped or {}
        counts = {str(d): len(c) for d, c in corpora.items()}
        return cls(
            pair_counts=dict(sorted(counts.items())),
            skipped_lines=dict(sorted((str(d), n) for d, n in skipped.items())),
            origins=dict(sorted((str(d), c.origin) for d, c in corpora.items())),
            total_pairs=sum(counts.values()),
        )

    def to_json(self) -> str:
        payload = {
            "directions": {
                d: {
                    "pairs": self.pair_counts[d],
                    "origin": self.origins[d],
                    "skipped_lines": self.skipped_lines.get(d, 0),
                }
                for d in self.pair_counts
            },
            "total_pairs": self.total_pairs,
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_corpus(path: str | Path, direction: Direction) -> tuple[ParallelCorpus, int]:
    """Read a direction's TSV. Returns the corpus and the number of
    malformed lines skipped (wrong field count or an empty side).
    """
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc
    pairs: list[SentencePair] = []
    skipped = 0
    for line in text.splitlines():
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            skipped += 1
            continue
        pairs.append(SentencePair(fields[0], fields[1]))
    if not pairs:
        raise DataError(f"zero valid lines in {path}")
    return ParallelCorpus(direction, tuple(pairs), ORIGIN_ORIGINAL), skipped


def save_corpus(corpus: ParallelCorpus, path: str | Path) -> None:
    if not corpus.pairs:
        raise DataError(f"refusing to persist empty corpus {corpus.direction}")
    lines = []
    for pair in corpus.pairs:
        if "\t" in pair.source or "\t" in pair.target:
            raise DataError(f"pair contains a tab, not representable as TSV: {pair!r}")
        if "\n" in pair.source or "\n" in pair.target:
            raise DataError(f"pair contains a newline, not representable as TSV: {pair!r}")
        lines.append(f"{pair.source}\t{pair.target}\n")
    Path(path).write_text("".join(lines), "utf-8")


def flip(corpus: ParallelCorpus) -> ParallelCorpus:
    """The same pairs with sides swapped, for the opposite direction."""
    return ParallelCorpus(
        corpus.direction.reverse(),
        tuple(p.swapped() for p in corpus.pairs),
        ORIGIN_FLIPPED,
    )


def balance_directions(
    corpora: dict[Direction, ParallelCorpus],
    flip_threshold: int = DEFAULT_FLIP_THRESHOLD,
    seed: int = 0,
) -> dict[Direction, ParallelCorpus]:
    """Create every missing reverse direction by flipping.

    Corpora below ``flip_threshold`` pairs are flipped whole; corpora at
    or above it contribute a uniform half (floor(n/2) pairs, drawn
    without replacement with a per-direction seeded RNG, original order
    preserved). Inputs are never mutated; output is deterministic for a
    given seed regardless of input dict ordering.
    """
    if flip_threshold <= 0:
        raise DataError(f"flip_threshold must be positive, got {flip_threshold}")
    balanced = dict(corpora)
    for direction in sorted(corpora, key=str):
        source = corpora[direction]
        if direction.reverse() in corpora:
            continue
        n = len(source)
        if n < flip_threshold:
            balanced[direction.reverse()] = flip(source)
            continue
        half = n // 2
        if half == 0:
            # only reachable for n == 1 with threshold 1; a half-flip would
            # produce an empty corpus, so flip the lone pair instead
            balanced[direction.reverse()] = flip(source)
            continue
        rng = derive_rng(seed, f"balance:{direction}")
        chosen = sorted(rng.sample(range(n), half))
        balanced[direction.reverse()] = ParallelCorpus(
            direction.reverse(),
            tuple(source.pairs[i].swapped() for i in chosen),
            ORIGIN_FLIPPED,
        )
    return balanced


def load_corpus_dir(
    path: str | Path,
) -> tuple[dict[Direction, ParallelCorpus], dict[Direction, int]]:
    """Load every ``{src}-{tgt}.tsv`` under a directory.

    Returns the corpus map and per-direction skipped-line counts.
    """
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"corpus directory not found: {path}")
    corpora: dict[Direction, ParallelCorpus] = {}
    skipped: dict[Direction, int] = {}
    for file in sorted(path.glob("*.tsv")):
        direction = Direction.parse(file.stem)
        corpora[direction], skipped[direction] = load_corpus(file, direction)
    if not corpora:
        raise DataError(f"no *.tsv corpus files under {path}")
    return corpora, skipped


def save_corpus_dir(corpora: dict[Direction, ParallelCorpus], path: str | Path) -> list[Path]:
    """Write one TSV per direction; returns the files written, sorted."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for direction in sorted(corpora, key=str):
        file = path / f"{direction}.tsv"
        save_corpus(corpora[direction], file)
        written.append(file)
    return written
