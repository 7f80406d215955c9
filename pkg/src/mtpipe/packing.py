"""Fixed-length training samples from tokenized sentence pairs.

Each pair of one direction is encoded as

    tokenize(source) + [sep_id] + tokenize(target) + [eos_id]

and appended greedily to the current sample. A pair that would overflow
starts the next sample (pairs never straddle samples), and a pair longer
than the sample itself is truncated target-side first, keeping the
SEP/EOS framing. Every emitted sample is padded with ``pad_id`` to
exactly ``pack_length`` tokens; pad tokens are excluded from the token
accounting.

Persistence: a binary record stream (little-endian u32 record length,
then that many little-endian u32 token ids) plus a JSON sidecar holding
the direction and the packing report.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Direction, ParallelCorpus
from .errors import DataError
from .vocab import Vocabulary

DEFAULT_PACK_LENGTH = 1024


@dataclass(frozen=True)
class PackingConfig:
    pack_length: int = DEFAULT_PACK_LENGTH
    sep_id: int = 0
    eos_id: int = 1
    pad_id: int = 2

    def __post_init__(self):
        if self.pack_length < 3:
            raise DataError(
                f"pack_length must be at least 3 to hold SEP/EOS framing, got {self.pack_length}"
            )

    @classmethod
    def for_vocabulary(cls, vocab: Vocabulary, pack_length: int = DEFAULT_PACK_LENGTH):
        """Reserve the three ids immediately after the vocabulary."""
        n = len(vocab)
        return cls(pack_length=pack_length, sep_id=n, eos_id=n + 1, pad_id=n + 2)


@dataclass(frozen=True)
class PackedSample:
    direction: Direction
    ids: tuple[int, ...]
    pair_span_count: int  # whole (untruncated) pairs contained


@dataclass
class PackingReport:
    samples: int = 0
    pairs_packed: int = 0
    pairs_truncated: int = 0
    pad_tokens: int = 0
    encoded_tokens: int = 0  # sum of encoded pair lengths before truncation
    dropped_tokens: int = 0  # tokens lost to truncation

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def encode_pair(source_ids: list[int], target_ids: list[int], config: PackingConfig) -> list[int]:
    return [*source_ids, config.sep_id, *target_ids, config.eos_id]


def _truncate(source_ids: list[int], target_ids: list[int], config: PackingConfig) -> list[int]:
    # target loses tokens first; source only once it alone overflows
    room = config.pack_length - 2
    src = source_ids[:room]
    tgt = target_ids[: room - len(src)]
    return [*src, config.sep_id, *tgt, config.eos_id]


def pack(
    corpus: ParallelCorpus,
    vocab: Vocabulary,
    config: PackingConfig,
) -> tuple[list[PackedSample], PackingReport]:
    """Pack one direction's corpus into fixed-length samples.

    Deterministic and order-preserving. Token conservation holds:
    non-pad tokens over all samples == encoded_tokens - dropped_tokens.
    """
    report = PackingReport()
    samples: list[PackedSample] = []
    current: list[int] = []
    current_pairs = 0

    def emit():
        nonlocal current, current_pairs
        report.pad_tokens += config.pack_length - len(current)
        ids = tuple(current) + (config.pad_id,) * (config.pack_length - len(current))
        samples.append(PackedSample(corpus.direction, ids, current_pairs))
        report.samples += 1
        current = []
        current_pairs = 0

    for pair in corpus.pairs:
        src = vocab.tokenize(pair.source)
        tgt = vocab.tokenize(pair.target)
        encoded = encode_pair(src, tgt, config)
        report.encoded_tokens += len(encoded)
        if len(encoded) > config.pack_length:
            if current:
                emit()
            truncated = _truncate(src, tgt, config)
            report.dropped_tokens += len(encoded) - len(truncated)
            report.pairs_truncated += 1
            current = truncated
            emit()
            continue
        if len(current) + len(encoded) > config.pack_length:
            emit()
        current.extend(encoded)
        current_pairs += 1
        report.pairs_packed += 1
    if current:
        emit()
    return samples, report


def write_samples(
    samples: list[PackedSample],
    report: PackingReport,
    direction: Direction,
    config: PackingConfig,
    records_path: str | Path,
    sidecar_path: str | Path,
) -> None:
    with open(records_path, "wb") as f:
        for sample in samples:
            f.write(struct.pack("<I", len(sample.ids)))
            f.write(struct.pack(f"<{len(sample.ids)}I", *sample.ids))
    sidecar = {
        "direction": str(direction),
        "pack_length": config.pack_length,
        "sep_id": config.sep_id,
        "eos_id": config.eos_id,
        "pad_id": config.pad_id,
        "pair_span_counts": [s.pair_span_count for s in samples],
        "report": report.to_dict(),
    }
    Path(sidecar_path).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", "utf-8")


def read_samples(records_path: str | Path, sidecar_path: str | Path) -> tuple[list[PackedSample], dict]:
    try:
        sidecar = json.loads(Path(sidecar_path).read_text("utf-8"))
        direction = Direction.parse(sidecar["direction"])
        spans = sidecar["pair_span_counts"]
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"malformed packing sidecar {sidecar_path}: {exc}") from exc
    samples = []
    data = Path(records_path).read_bytes()
    offset = 0
    index = 0
    while offset < len(data):
        if offset + 4 > len(data):
            raise DataError(f"truncated record header in {records_path}")
        (length,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if offset + 4 * length > len(data):
            raise DataError(f"truncated record body in {records_path}")
        ids = struct.unpack_from(f"<{length}I", data, offset)
        offset += 4 * length
        samples.append(PackedSample(direction, ids, spans[index]))
        index += 1
    if index != len(spans):
        raise DataError(f"record count mismatch between {records_path} and sidecar")
    return samples, sidecar
