"""Byte-level BPE vocabulary: training, extension, tokenization.

Tokens are raw byte sequences. The 256 single-byte tokens are always
present, so any UTF-8 input tokenizes without an out-of-vocabulary path
and ``detokenize(tokenize(s)) == s`` holds for every string.

Training is greedy BPE over UTF-8 bytes: each round merges the most
frequent adjacent token pair, ties broken by lexicographic order of the
(left, right) byte sequences, stopping early once no pair occurs twice.
Each text is one symbol sequence; no word-boundary pre-segmentation is
applied and the space byte is treated like any other byte.

Extending a vocabulary never renumbers it: tokens already present are
skipped, novel tokens are appended, and the base merges keep priority
over the appended ones, so the base tokenization of existing text is
preserved.
"""

from __future__ import annotations

import base64
import json
import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .corpus import Direction, ParallelCorpus
from .errors import DataError
from .seeding import derive_rng

DEFAULT_MAX_NUM = 1_000_000

Merge = tuple[bytes, bytes]


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token inventory (index = token id) plus merge rules.

    ``base_size`` tokens at the front are inherited verbatim from the
    parent vocabulary; their ids never change under extension.
    """

    tokens: tuple[bytes, ...]
    merges: tuple[Merge, ...] = ()
    base_size: int = 0

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise DataError("vocabulary tokens must be unique")
        present = set(self.tokens)
        for b in range(256):
            if bytes([b]) not in present:
                raise DataError(f"single-byte token {b:#04x} missing from vocabulary")
        for left, right in self.merges:
            if left not in present or right not in present or left + right not in present:
                raise DataError(f"merge ({left!r}, {right!r}) refers to unknown tokens")
        if not 0 <= self.base_size <= len(self.tokens):
            raise DataError(f"base_size {self.base_size} out of range")

    def __len__(self) -> int:
        return len(self.tokens)

    @cached_property
    def _ids(self) -> dict[bytes, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}

    @cached_property
    def _ranks(self) -> dict[Merge, int]:
        ranks: dict[Merge, int] = {}
        for i, pair in enumerate(self.merges):
            ranks.setdefault(pair, i)
        return ranks

    def token_id(self, token: bytes) -> int:
        return self._ids[token]

    def tokenize(self, text: str) -> list[int]:
        """Deterministic byte-level BPE segmentation of ``text``.

        Merges apply by priority (list order): the lowest-ranked pair
        present in the sequence is merged at every occurrence, leftmost
        first and non-overlapping, until no known pair remains.
        """
        seq = [bytes([b]) for b in text.encode("utf-8")]
        ranks = self._ranks
        while len(seq) >= 2:
            best: Merge | None = None
            best_rank = len(self.merges)
            for pair in zip(seq, seq[1:]):
                rank = ranks.get(pair)
                if rank is not None and rank < best_rank:
                    best, best_rank = pair, rank
            if best is None:
                break
            seq = _apply_merge(seq, best)
        ids = self._ids
        return [ids[tok] for tok in seq]

    def detokenize(self, ids: list[int]) -> str:
        """Inverse of tokenize: concatenate token bytes, decode UTF-8.

        Raises on out-of-range ids and on byte sequences that are not
        valid UTF-8 (possible for adversarial id lists).
        """
        chunks = []
        for i in ids:
            if not 0 <= i < len(self.tokens):
                raise DataError(f"token id {i} out of range for vocabulary of {len(self)}")
            chunks.append(self.tokens[i])
        data = b"".join(chunks)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"token ids decode to invalid UTF-8: {exc}") from exc

    def to_json(self) -> str:
        payload = {
            "tokens": [base64.b64encode(t).decode("ascii") for t in self.tokens],
            "merges": [
                [base64.b64encode(l).decode("ascii"), base64.b64encode(r).decode("ascii")]
                for l, r in self.merges
            ],
            "base_size": self.base_size,
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        try:
            payload = json.loads(text)
            tokens = tuple(base64.b64decode(t) for t in payload["tokens"])
            merges = tuple(
                (base64.b64decode(l), base64.b64decode(r)) for l, r in payload["merges"]
            )
            base_size = int(payload["base_size"])
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"malformed vocabulary JSON: {exc}") from exc
        return cls(tokens, merges, base_size)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        try:
            return cls.from_json(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read vocabulary {path}: {exc}") from exc


@dataclass(frozen=True)
class VocabTrainConfig:
    target_size: int
    max_num: int = DEFAULT_MAX_NUM
    seed: int = 0

    def validate(self, current_size: int) -> None:
        if self.target_size <= current_size:
            raise DataError(
                f"target_size {self.target_size} must exceed current vocabulary size {current_size}"
            )
        if self.max_num <= 0:
            raise DataError(f"max_num must be positive, got {self.max_num}")


def byte_vocabulary() -> Vocabulary:
    """The minimal vocabulary: the 256 single bytes, no merges."""
    return Vocabulary(tuple(bytes([b]) for b in range(256)))


def standin_base_vocabulary(size: int) -> Vocabulary:
    """A synthetic base vocabulary of a given size.

    The real parent model's token inventory is not public; since only
    size and id stability matter downstream, ids 256+ are filled with
    reserved placeholder tokens.
    """
    if size < 256:
        raise DataError(f"base vocabulary needs at least the 256 bytes, got size {size}")
    tokens = [bytes([b]) for b in range(256)]
    tokens += [b"<reserved_%05d>" % i for i in range(size - 256)]
    return Vocabulary(tuple(tokens))


def _apply_merge(seq: list[bytes], pair: Merge) -> list[bytes]:
    # leftmost-first, non-overlapping
    out: list[bytes] = []
    merged = pair[0] + pair[1]
    i = 0
    while i < len(seq):
        if i + 1 < len(seq) and seq[i] == pair[0] and seq[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def train_bpe(texts: list[str], num_merges: int) -> list[Merge]:
    """Learn up to ``num_merges`` byte-level merges from ``texts``.

    Stops early when no adjacent pair occurs at least twice. Adjacent
    pairs are counted with overlap within each text, summed across
    texts; texts never join.
    """
    if num_merges < 0:
        raise DataError(f"num_merges must be non-negative, got {num_merges}")
    seqs = [[bytes([b]) for b in t.encode("utf-8")] for t in texts if t]
    merges: list[Merge] = []
    for _ in range(num_merges):
        counts: Counter[Merge] = Counter()
        for seq in seqs:
            counts.update(zip(seq, seq[1:]))
        if not counts:
            break
        top = max(counts.values())
        if top < 2:
            break
        best = min(pair for pair, c in counts.items() if c == top)
        merges.append(best)
        seqs = [_apply_merge(seq, best) if best in set(zip(seq, seq[1:])) else seq for seq in seqs]
    return merges


def merge_outputs(merges: list[Merge]) -> list[bytes]:
    """Token byte sequences minted by a merge list, in merge order."""
    return [left + right for left, right in merges]


def extend_vocabulary(
    base: Vocabulary,
    new_tokens: list[bytes],
    new_merges: list[Merge] = (),
) -> Vocabulary:
    """Append novel tokens and lower-priority merges to ``base``.

    Tokens already present (or repeated in ``new_tokens``) are skipped;
    the surviving ones are appended in order, so every id of ``base`` is
    unchanged. Base merges precede the appended ones. Appended merges
    must only reference tokens present in the result.
    """
    tokens = list(base.tokens)
    seen = set(tokens)
    for tok in new_tokens:
        if tok in seen:
            continue
        tokens.append(tok)
        seen.add(tok)
    merges = list(base.merges)
    merge_seen = set(merges)
    for pair in new_merges:
        if pair in merge_seen:
            continue
        merges.append(pair)
        merge_seen.add(pair)
    return Vocabulary(tuple(tokens), tuple(merges), base_size=len(base.tokens))


def sample_for_vocab(
    corpora: dict[Direction, ParallelCorpus],
    max_num: int = DEFAULT_MAX_NUM,
    seed: int = 0,
) -> dict[str, list[str]]:
    """Per-language sentence sample for vocabulary training.

    Each language draws from every corpus side where it appears: at most
    ``max_num`` sentences, uniformly without replacement under a
    per-language seeded RNG; everything if fewer exist.
    """
    if max_num <= 0:
        raise DataError(f"max_num must be positive, got {max_num}")
    pools: dict[str, list[str]] = {}
    for direction in sorted(corpora, key=str):
        c = corpora[direction]
        src_pool = pools.setdefault(direction.src, [])
        tgt_pool = pools.setdefault(direction.tgt, [])
        for pair in c.pairs:
            src_pool.append(pair.source)
            tgt_pool.append(pair.target)
    sampled: dict[str, list[str]] = {}
    for lang in sorted(pools):
        sentences = pools[lang]
        if len(sentences) <= max_num:
            sampled[lang] = list(sentences)
        else:
            rng = derive_rng(seed, f"vocab-sample:{lang}")
            sampled[lang] = rng.sample(sentences, max_num)
    return sampled


def grow_vocabulary(
    base: Vocabulary,
    corpora: dict[Direction, ParallelCorpus],
    config: VocabTrainConfig,
) -> tuple[Vocabulary, int]:
    """Train merges on a capped multilingual sample and extend ``base``
    toward ``config.target_size``.

    Novel merge outputs are appended in learned order until the target
    is reached. Returns the extended vocabulary and the shortfall
    (0 when the sample was rich enough to reach the target).
    """
    config.validate(len(base))
    samples = sample_for_vocab(corpora, config.max_num, config.seed)
    texts = [s for lang in sorted(samples) for s in samples[lang]]
    needed = config.target_size - len(base)
    existing = set(base.tokens)
    merges = train_bpe(texts, num_merges=needed)
    kept_tokens: list[bytes] = []
    kept_merges: list[Merge] = []
    for pair in merges:
        token = pair[0] + pair[1]
        kept_merges.append(pair)
        if token not in existing and token not in set(kept_tokens):
            kept_tokens.append(token)
        if len(kept_tokens) == needed:
            break
    extended = extend_vocabulary(base, kept_tokens, kept_merges)
    return extended, config.target_size - len(extended)
