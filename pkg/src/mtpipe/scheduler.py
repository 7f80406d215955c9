"""Incremental curriculum scheduler for multilingual pre-training batches.

Directions are grouped into sample-count intervals, intervals are ordered
by descending sample mean, and training walks them high-resource first.
While an interval trains, the mean of its untrained samples (``M_ut``,
summed remaining samples divided by the number of member directions) is
recomputed at every batch boundary; at the first boundary where it is no
longer greater than the next interval's mean, all untrained samples move
into the next interval, which is then reshuffled and trained with the
merged membership. The final interval drains completely. Every sample is
emitted exactly once.

Replay contract (what makes two traces byte-identical):

* One ``random.Random(seed)`` drives the whole schedule.
* Each interval phase assembles its pool as: for every original member
  in lexicographic direction order, that member's samples in index
  order; then the carried-over remainder donated by the previous merge,
  in its carried order. The pool is shuffled once, at phase start.
* A batch consumes ``min(batch_size, samples left in the pool)`` samples
  off the front of the pool; only a phase's last batch can be short.
* The boundary check also runs before the first batch, so an interval
  whose starting mean is already <= the next interval's mean donates
  everything without emitting a batch.
* Directions donated with zero remaining samples do not join the target
  interval's membership. Member counts are otherwise fixed for the
  duration of a phase, even when a member's remaining count hits zero.
* Means are Python float divisions of exact integer sums.
* Events serialize to JSONL with sorted keys and compact separators.

Event kinds: ``interval_start`` (interval, mean, members, pool),
``batch`` (batch_index, interval, composition), ``merge`` (from, to,
moved, new_mean), ``done`` (batches, samples).
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Direction
from .errors import DataError

DEFAULT_S_HIGH = 10_000
DEFAULT_S_LOW = 5_000
DEFAULT_CUTOVER = 10_000


@dataclass(frozen=True)
class PairBucket:
    """Per-direction sample inventory feeding the scheduler."""

    direction: Direction
    total_samples: int
    remaining_samples: int = -1  # -1 means "all of them"

    def __post_init__(self):
        if self.total_samples < 0:
            raise DataError(f"negative sample count for {self.direction}")
        if self.remaining_samples == -1:
            object.__setattr__(self, "remaining_samples", self.total_samples)
        if not 0 <= self.remaining_samples <= self.total_samples:
            raise DataError(
                f"remaining {self.remaining_samples} out of range for {self.direction}"
            )


@dataclass(frozen=True)
class Interval:
    """Half-open sample-count range [lo, hi) and the buckets inside it."""

    lo: int
    hi: int
    members: tuple[PairBucket, ...]

    def __post_init__(self):
        if not self.members:
            raise DataError(f"interval {self.label} has no members")
        for b in self.members:
            if not self.lo <= b.total_samples < self.hi:
                raise DataError(
                    f"{b.direction} with {b.total_samples} samples outside {self.label}"
                )

    @property
    def label(self) -> str:
        return f"[{self.lo},{self.hi})"

    @property
    def mean(self) -> float:
        # always recomputed from members, never cached
        return sum(b.total_samples for b in self.members) / len(self.members)


@dataclass(frozen=True)
class ScheduleEvent:
    kind: str
    interval: str | None = None
    mean: float | None = None
    members: tuple[str, ...] | None = None
    pool: int | None = None
    batch_index: int | None = None
    composition: dict[str, int] | None = None
    from_interval: str | None = None
    to_interval: str | None = None
    moved: int | None = None
    new_mean: float | None = None
    batches: int | None = None
    samples: int | None = None

    _JSON_KEYS = {
        "from_interval": "from",
        "to_interval": "to",
    }

    def to_dict(self) -> dict:
        out = {}
        for name, value in self.__dict__.items():
            if value is None:
                continue
            key = self._JSON_KEYS.get(name, name)
            if name == "members":
                value = list(value)
            out[key] = value
        return out

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_dict(cls, payload: dict) -> "ScheduleEvent":
        reverse = {v: k for k, v in cls._JSON_KEYS.items()}
        kwargs = {}
        for key, value in payload.items():
            name = reverse.get(key, key)
            if name == "members":
                value = tuple(value)
            kwargs[name] = value
        try:
            event = cls(**kwargs)
        except TypeError as exc:
            raise DataError(f"malformed schedule event: {exc}") from exc
        if event.kind not in ("interval_start", "batch", "merge", "done"):
            raise DataError(f"unknown schedule event kind: {event.kind!r}")
        return event


def partition_intervals(
    buckets: Iterable[PairBucket],
    s_high: int = DEFAULT_S_HIGH,
    s_low: int = DEFAULT_S_LOW,
    cutover: int = DEFAULT_CUTOVER,
) -> tuple[list[Interval], list[PairBucket]]:
    """Assign each bucket to a sample-count interval.

    Buckets holding at least ``cutover`` samples land in the width
    ``s_high`` interval containing their count, smaller non-empty
    buckets in the width ``s_low`` one. Empty buckets are excluded and
    returned separately. Intervals come back ordered by ascending lower
    bound; empty intervals never materialize.
    """
    if min(s_high, s_low, cutover) <= 0:
        raise DataError("interval sizes and cutover must be positive")
    groups: dict[tuple[int, int], list[PairBucket]] = {}
    excluded: list[PairBucket] = []
    for bucket in sorted(buckets, key=lambda b: str(b.direction)):
        n = bucket.total_samples
        if n == 0:
            excluded.append(bucket)
            continue
        width = s_high if n >= cutover else s_low
        lo = (n // width) * width
        groups.setdefault((lo, lo + width), []).append(bucket)
    intervals = [Interval(lo, hi, tuple(g)) for (lo, hi), g in sorted(groups.items())]
    return intervals, excluded


def interval_means(intervals: list[Interval]) -> list[Interval]:
    """Order intervals by descending sample mean.

    Ties break by descending lower bound, then by the lexicographically
    smallest member direction, so the order is always deterministic.
    """
    if not intervals:
        raise DataError("no intervals to order")
    return sorted(
        intervals,
        key=lambda iv: (-iv.mean, -iv.lo, min(str(b.direction) for b in iv.members)),
    )


def schedule(
    intervals: list[Interval],
    batch_size: int,
    seed: int,
) -> Iterator[ScheduleEvent]:
    """Stream the batch/merge events of the incremental schedule.

    ``intervals`` must already be ordered by non-increasing mean (see
    :func:`interval_means`). The trace is a pure function of
    (intervals, batch_size, seed); see the module docstring for the
    exact replay contract.
    """
    if batch_size <= 0:
        raise DataError(f"batch_size must be positive, got {batch_size}")
    if not intervals:
        raise DataError("cannot schedule an empty interval list")
    means = [iv.mean for iv in intervals]
    if any(a < b for a, b in zip(means, means[1:])):
        raise DataError("intervals must be sorted by non-increasing mean")

    rng = random.Random(seed)
    original_members = [
        {str(b.direction): b.total_samples for b in sorted(iv.members, key=lambda m: str(m.direction))}
        for iv in intervals
    ]
    carried: list[str] = []  # donated sample tags, in carried order
    carried_members: list[tuple[str, int]] = []
    batch_index = 0
    emitted = 0

    for i, interval in enumerate(intervals):
        own = original_members[i]
        pool = [d for d in own for _ in range(own[d])]
        pool.extend(carried)
        members: dict[str, int] = dict(own)
        for d, n in carried_members:
            members[d] = n
        carried, carried_members = [], []
        rng.shuffle(pool)

        member_count = len(members)
        remaining = len(pool)
        yield ScheduleEvent(
            kind="interval_start",
            interval=interval.label,
            mean=remaining / member_count,
            members=tuple(sorted(members)),
            pool=remaining,
        )
        if i + 1 < len(intervals):
            nxt = original_members[i + 1]
            next_mean = sum(nxt.values()) / len(nxt)
        else:
            next_mean = 0.0  # the last interval drains completely

        pos = 0
        while remaining / member_count > next_mean and pos < len(pool):
            take = min(batch_size, len(pool) - pos)
            composition = dict(sorted(Counter(pool[pos : pos + take]).items()))
            yield ScheduleEvent(
                kind="batch",
                batch_index=batch_index,
                interval=interval.label,
                composition=composition,
            )
            pos += take
            remaining -= take
            batch_index += 1
            emitted += take

        if i + 1 < len(intervals):
            tail = pool[pos:]
            donated = Counter(tail)
            carried = tail
            carried_members = [(d, donated[d]) for d in members if donated[d] > 0]
            target = original_members[i + 1]
            new_count = len(target) + len(carried_members)
            new_total = sum(target.values()) + len(tail)
            yield ScheduleEvent(
                kind="merge",
                from_interval=interval.label,
                to_interval=intervals[i + 1].label,
                moved=len(tail),
                new_mean=new_total / new_count,
            )

    yield ScheduleEvent(kind="done", batches=batch_index, samples=emitted)


@dataclass
class DirectionExposure:
    direction: str
    consumed: int = 0
    first_batch: int | None = None
    last_batch: int | None = None


@dataclass
class ExposureTable:
    directions: dict[str, DirectionExposure]
    merges: list[dict]
    batches: int
    samples_consumed: int

    def to_tsv(self) -> str:
        lines = ["direction\tconsumed\tfirst_batch\tlast_batch\n"]
        for d in sorted(self.directions):
            e = self.directions[d]
            lines.append(f"{d}\t{e.consumed}\t{e.first_batch}\t{e.last_batch}\n")
        return "".join(lines)


def simulate_exposure(events: Iterable[ScheduleEvent]) -> ExposureTable:
    """Tally a trace: per-direction consumption, first/last exposure,
    merge history. Stands in for the trainer when auditing a schedule.
    """
    directions: dict[str, DirectionExposure] = {}
    merges: list[dict] = []
    batches = 0
    consumed = 0
    done_seen = False
    for event in events:
        if done_seen:
            raise DataError("trace continues after done event")
        if event.kind == "interval_start":
            continue
        if event.kind == "batch":
            if event.composition is None or event.batch_index is None:
                raise DataError("batch event missing composition or index")
            if event.batch_index != batches:
                raise DataError(
                    f"batch index {event.batch_index} out of order, expected {batches}"
                )
            for d, n in event.composition.items():
                if n <= 0:
                    raise DataError(f"non-positive composition count for {d}")
                exp = directions.setdefault(d, DirectionExposure(d))
                exp.consumed += n
                if exp.first_batch is None:
                    exp.first_batch = event.batch_index
                exp.last_batch = event.batch_index
                consumed += n
            batches += 1
            continue
        if event.kind == "merge":
            merges.append(event.to_dict())
            continue
        if event.kind == "done":
            if event.batches != batches or event.samples != consumed:
                raise DataError(
                    f"done event claims {event.batches} batches / {event.samples} samples, "
                    f"trace holds {batches} / {consumed}"
                )
            done_seen = True
            continue
        raise DataError(f"unknown schedule event kind: {event.kind!r}")
    return ExposureTable(directions, merges, batches, consumed)


def write_trace(events: Iterable[ScheduleEvent], path: str | Path) -> int:
    """Persist events as canonical JSONL; returns the event count."""
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for event in events:
            f.write(event.to_json_line() + "\n")
            count += 1
    return count


def read_trace(path: str | Path) -> list[ScheduleEvent]:
    events = []
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read trace {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        events.append(ScheduleEvent.from_dict(payload))
    return events
