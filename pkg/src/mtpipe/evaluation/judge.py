"""Remote LLM judging: batching, retries, and missing-score bookkeeping.

Items are grouped by direction and batched in fives (a batch never
straddles directions). Each batch becomes one chat-completion call.
Transient failures (429, 5xx, network errors, malformed payloads) are
retried with exponential backoff; a batch that still fails is recorded
as missing rather than guessed. Authentication failures abort the whole
run immediately. Batches may run on a small thread pool; results land
by item index, so completion order never changes the output.
"""

from __future__ import annotations

import json
import logging
import os
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..errors import DataError, EndpointError
from .items import EvalItem, RubricScore
from .rubric import MAX_BATCH, build_rubric_prompt, parse_scores

logger = logging.getLogger(__name__)

Transport = Callable[[str, dict, dict, float], tuple[int, str]]


class AuthenticationError(EndpointError):
    """Credential problems; retrying cannot help, so the run aborts."""


@dataclass(frozen=True)
class JudgeConfig:
    url: str
    model: str
    api_key_env: str = "MTPIPE_JUDGE_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    parallelism: int = 4
    batch_size: int = MAX_BATCH

    def __post_init__(self):
        if not 1 <= self.batch_size <= MAX_BATCH:
            raise DataError(f"batch_size must be in 1..{MAX_BATCH}, got {self.batch_size}")
        if self.max_retries < 0 or self.parallelism < 1 or self.timeout <= 0:
            raise DataError("invalid judge settings")


def _http_transport(url: str, headers: dict, payload: dict, timeout: float) -> tuple[int, str]:
    data = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(url, data=data, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, response.read().decode("utf-8")
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read().decode("utf-8", "replace")


class ChatCompletionClient:
    """Minimal chat-completion caller with backoff.

    ``transport`` and ``sleeper`` are injectable so tests can run
    without a network or a clock.
    """

    def __init__(self, config: JudgeConfig, transport: Transport | None = None,
                 sleeper: Callable[[float], None] = time.sleep):
        self.config = config
        self._transport = transport or _http_transport
        self._sleep = sleeper

    def complete(self, prompt: str) -> str:
        config = self.config
        key = os.environ.get(config.api_key_env)
        if not key:
            raise AuthenticationError(f"credential env var {config.api_key_env} is not set")
        headers = {"Content-Type": "application/json", "Authorization": f"Bearer {key}"}
        payload = {"model": config.model, "messages": [{"role": "user", "content": prompt}]}
        last_error = "no attempt made"
        for attempt in range(config.max_retries + 1):
            if attempt:
                delay = config.backoff_base * 2 ** (attempt - 1)
                logger.info("retrying judge call in %.1fs (%s)", delay, last_error)
                self._sleep(delay)
            try:
                status, body = self._transport(config.url, headers, payload, config.timeout)
            except OSError as exc:
                last_error = f"network error: {exc}"
                continue
            if status in (401, 403):
                raise AuthenticationError(f"authentication failed with HTTP {status}")
            if status != 200:
                last_error = f"HTTP {status}"
                continue
            try:
                doc = json.loads(body)
                content = doc["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError):
                last_error = "malformed completion payload"
                continue
            if not isinstance(content, str):
                last_error = "non-text completion content"
                continue
            return content
        raise EndpointError(
            f"judge call failed after {config.max_retries + 1} attempts: {last_error}"
        )


def _batches(items: Sequence[EvalItem], batch_size: int) -> list[tuple[int, list[EvalItem]]]:
    batches = []
    start = 0
    while start < len(items):
        end = start + 1
        while (
            end < len(items)
            and end - start < batch_size
            and items[end].direction == items[start].direction
        ):
            end += 1
        batches.append((start, list(items[start:end])))
        start = end
    return batches


def judge(items: Sequence[EvalItem], client: ChatCompletionClient) -> list[RubricScore | None]:
    """Score every item, or mark it missing; never fabricate.

    Raises EndpointError when authentication fails or when every batch
    failed (nothing got scored at all).
    """
    if not items:
        raise DataError("no items to judge")
    for item in items:
        if not item.hypothesis:
            raise DataError(f"item for {item.direction} has no hypothesis to judge")
    config = client.config
    batches = _batches(items, config.batch_size)
    results: list[RubricScore | None] = [None] * len(items)

    def run(batch: tuple[int, list[EvalItem]]) -> tuple[int, list[RubricScore] | None]:
        start, chunk = batch
        prompt = build_rubric_prompt([(it.hypothesis, it.reference) for it in chunk])
        try:
            response = client.complete(prompt)
        except AuthenticationError:
            raise
        except EndpointError as exc:
            logger.warning("batch at item %d marked missing: %s", start, exc)
            return start, None
        try:
            parsed = parse_scores(response, len(chunk))
        except DataError as exc:
            logger.warning("batch at item %d returned unusable scores: %s", start, exc)
            return start, None
        if parsed.overall and len(chunk) > 1:
            logger.info("batch at item %d judged with a single overall rating", start)
        scores = [
            RubricScore(value, config.model, response, parsed.overall)
            for value in parsed.values
        ]
        return start, scores

    workers = min(config.parallelism, len(batches))
    if workers == 1:
        outcomes = [run(b) for b in batches]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, batches))
    for start, scores in outcomes:
        if scores is None:
            continue
        results[start : start + len(scores)] = scores
    if all(r is None for r in results):
        raise EndpointError("every judge batch failed; no scores were produced")
    return results


def write_scores(items: Sequence[EvalItem], scores: Sequence[RubricScore | None],
                 path: str | Path) -> int:
    """Persist item/score rows as JSONL; missing scores stay null."""
    if len(items) != len(scores):
        raise DataError(f"{len(items)} items but {len(scores)} scores")
    with open(path, "w", encoding="utf-8") as f:
        for item, score in zip(items, scores):
            row = {
                "direction": str(item.direction),
                "hypothesis": item.hypothesis,
                "reference": item.reference,
                "score": None if score is None else score.value,
                "judge": None if score is None else score.judge_model,
                "overall_mode": None if score is None else score.overall_mode,
            }
            f.write(json.dumps(row, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")
    return len(items)
