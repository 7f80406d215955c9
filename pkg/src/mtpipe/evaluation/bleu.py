"""Corpus-level BLEU with a fixed, oracle-checkable tokenizer.

Tokenization splits on Unicode whitespace and makes every punctuation
character (any Unicode P* category) its own token. Scores are the
classic corpus formulation: clipped 1..4-gram precisions pooled over
all segments, uniform weights in the geometric mean, and the brevity
penalty on pooled lengths. An n-gram order with no hypothesis n-grams
at all contributes log 1 to the mean, so very short perfect
hypotheses still score 100; an order with hypothesis n-grams but zero
matches sends the whole score to 0.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..errors import DataError
from .items import EvalItem

MAX_ORDER = 4


def tokenize_for_bleu(text: str) -> list[str]:
    tokens: list[str] = []
    word: list[str] = []
    for ch in text:
        if ch.isspace():
            if word:
                tokens.append("".join(word))
                word = []
        elif unicodedata.category(ch).startswith("P"):
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(ch)
        else:
            word.append(ch)
    if word:
        tokens.append("".join(word))
    return tokens


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, ...]
    matches: tuple[int, ...]
    totals: tuple[int, ...]
    brevity_penalty: float
    hypothesis_length: int
    reference_length: int


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu_details(items: Sequence[EvalItem]) -> BleuScore:
    if not items:
        raise DataError("cannot score an empty item list")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for item in items:
        hyp = tokenize_for_bleu(item.hypothesis)
        ref = tokenize_for_bleu(item.reference)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_grams = _ngrams(hyp, n)
            if not hyp_grams:
                continue
            ref_grams = _ngrams(ref, n)
            totals[n - 1] += sum(hyp_grams.values())
            matches[n - 1] += sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())

    precisions = tuple(
        m / t if t else 1.0 for m, t in zip(matches, totals)
    )
    if hyp_len == 0:
        return BleuScore(0.0, precisions, tuple(matches), tuple(totals), 0.0, 0, ref_len)
    if hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    if any(t > 0 and m == 0 for m, t in zip(matches, totals)):
        score = 0.0
    else:
        log_sum = sum(math.log(m / t) for m, t in zip(matches, totals) if t > 0)
        score = bp * math.exp(log_sum / MAX_ORDER) * 100.0
    return BleuScore(score, precisions, tuple(matches), tuple(totals), bp, hyp_len, ref_len)


def corpus_bleu(items: Sequence[EvalItem]) -> float:
    return corpus_bleu_details(items).score


def bleu_by_direction(items: Sequence[EvalItem]) -> dict[str, BleuScore]:
    """Score each direction's item subset separately."""
    grouped: dict[str, list[EvalItem]] = {}
    for item in items:
        grouped.setdefault(str(item.direction), []).append(item)
    return {d: corpus_bleu_details(g) for d, g in sorted(grouped.items())}
