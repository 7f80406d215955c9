"""End-to-end orchestration: balance, vocab, pack, partition, schedule,
instruct, with per-stage artifacts and a run manifest.

Every stage derives its own seed from the root seed with a fixed label
(``stage:<name>``), so a stage rerun in isolation reproduces the full
run's output. A failing stage removes the files it already wrote and
surfaces as a StageError naming the stage. One lock file per output
directory keeps concurrent runs out.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .corpus import CorpusStats, balance_directions, load_corpus_dir, save_corpus_dir
from .errors import ConfigError, DataError, StageError
from .instruct import build_instruction_dataset, write_instructions
from .manifest import RunManifest, digest_tree, file_digest
from .packing import PackingConfig, pack, write_samples
from .scheduler import (
    PairBucket,
    interval_means,
    partition_intervals,
    schedule,
    write_trace,
)
from .seeding import derive_seed
from .vocab import VocabTrainConfig, Vocabulary, grow_vocabulary, standin_base_vocabulary

logger = logging.getLogger(__name__)

STAGES = ("balance", "vocab", "pack", "partition", "schedule", "instruct")


@dataclass
class PipelineConfig:
    corpus_dir: Path
    out_dir: Path
    seed: int
    batch_size: int
    base_vocab: Path | None = None
    base_vocab_size: int = 32_000
    target_vocab_size: int = 53_613
    flip_threshold: int = 1_000_000
    max_num: int = 1_000_000
    pack_length: int = 1_024
    s_high: int = 10_000
    s_low: int = 5_000
    cutover: int = 10_000
    per_direction: int = 1_000
    judge_url: str | None = None
    judge_model: str | None = None
    judge_api_key_env: str = "MTPIPE_JUDGE_API_KEY"
    judge_timeout: float = 60.0
    judge_max_retries: int = 3
    judge_backoff_base: float = 1.0
    judge_parallelism: int = 4

    _COUNT_FIELDS = (
        "batch_size",
        "base_vocab_size",
        "target_vocab_size",
        "flip_threshold",
        "max_num",
        "pack_length",
        "s_high",
        "s_low",
        "cutover",
        "per_direction",
    )

    def __post_init__(self):
        self.corpus_dir = Path(self.corpus_dir)
        self.out_dir = Path(self.out_dir)
        if self.base_vocab is not None:
            self.base_vocab = Path(self.base_vocab)

    def validate(self) -> None:
        for name in self._COUNT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")

    def snapshot(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = str(value) if isinstance(value, Path) else value
        return out


CONFIG_KEYS = {f.name for f in fields(PipelineConfig)}


def load_config_file(path: str | Path) -> dict:
    """Read a TOML config whose keys match PipelineConfig fields."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(sorted(unknown))}")
    return data


def merge_config(file_values: dict, flag_values: dict) -> dict:
    """Overlay explicitly passed flags onto config-file values.

    Conflicts resolve flag-wins and are logged so a run's effective
    settings stay auditable.
    """
    merged = dict(file_values)
    for key, value in flag_values.items():
        if value is None:
            continue
        if key in merged and merged[key] != value:
            logger.info("flag --%s=%r overrides config value %r", key.replace("_", "-"), value, merged[key])
        merged[key] = value
    return merged


class _Lock:
    """One pipeline instance per output directory."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / "mtpipe.lock"
        self._fd: int | None = None

    def __enter__(self):
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"output directory is locked by another run; remove {self.path} if stale"
            ) from None
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *exc_info):
        if self._fd is not None:
            os.close(self._fd)
            self.path.unlink(missing_ok=True)
        return False


class _Stage:
    """Names a stage in errors and removes its partial artifacts."""

    def __init__(self, name: str):
        self.name = name
        self.created: list[Path] = []

    def track(self, path: Path) -> Path:
        self.created.append(path)
        return path

    def __enter__(self):
        logger.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            return False
        for path in reversed(self.created):
            try:
                if path.is_dir():
                    for child in path.iterdir():
                        child.unlink()
                    path.rmdir()
                else:
                    path.unlink(missing_ok=True)
            except OSError:
                logger.warning("could not clean up %s", path)
        if isinstance(exc, StageError):
            return False
        raise StageError(self.name, exc) from exc


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run every stage in order and write ``manifest.json``.

    Deterministic: identical inputs and config produce byte-identical
    artifacts and manifest.
    """
    config.validate()
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    inputs: dict[str, str] = {}
    if config.base_vocab is not None:
        inputs["base_vocab"] = file_digest(config.base_vocab)

    with _Lock(out_dir):
        with _Stage("balance") as stage:
            corpora, skipped = load_corpus_dir(config.corpus_dir)
            for name, digest in digest_tree(config.corpus_dir, "*.tsv").items():
                inputs[f"corpus/{name}"] = digest
            balanced = balance_directions(
                corpora, config.flip_threshold, derive_seed(config.seed, "stage:balance")
            )
            balanced_dir = stage.track(out_dir / "balanced")
            for path in save_corpus_dir(balanced, balanced_dir):
                stage.track(path)
            stats_path = stage.track(out_dir / "corpus_stats.json")
            stats_path.write_text(CorpusStats.collect(balanced, skipped).to_json(), "utf-8")

        with _Stage("vocab") as stage:
            if config.base_vocab is not None:
                base = Vocabulary.load(config.base_vocab)
            else:
                base = standin_base_vocabulary(config.base_vocab_size)
            vocab, shortfall = grow_vocabulary(
                base,
                balanced,
                VocabTrainConfig(
                    target_size=config.target_vocab_size,
                    max_num=config.max_num,
                    seed=derive_seed(config.seed, "stage:vocab"),
                ),
            )
            if shortfall:
                logger.warning(
                    "vocabulary stopped %d tokens short of %d (corpus exhausted)",
                    shortfall,
                    config.target_vocab_size,
                )
            vocab_path = stage.track(out_dir / "vocab.json")
            vocab.save(vocab_path)

        with _Stage("pack") as stage:
            packing_config = PackingConfig.for_vocabulary(vocab, config.pack_length)
            packed_dir = stage.track(out_dir / "packed")
            packed_dir.mkdir(exist_ok=True)
            sample_counts: dict = {}
            for direction in sorted(balanced, key=str):
                samples, report = pack(balanced[direction], vocab, packing_config)
                records = stage.track(packed_dir / f"{direction}.bin")
                sidecar = stage.track(packed_dir / f"{direction}.json")
                write_samples(samples, report, direction, packing_config, records, sidecar)
                sample_counts[direction] = len(samples)

        with _Stage("partition") as stage:
            buckets = [PairBucket(d, n) for d, n in sample_counts.items()]
            intervals, excluded = partition_intervals(
                buckets, config.s_high, config.s_low, config.cutover
            )
            ordered = interval_means(intervals)
            payload = {
                "intervals": [
                    {
                        "interval": iv.label,
                        "mean": iv.mean,
                        "members": {
                            str(b.direction): b.total_samples for b in iv.members
                        },
                    }
                    for iv in ordered
                ],
                "excluded": sorted(str(b.direction) for b in excluded),
            }
            intervals_path = stage.track(out_dir / "intervals.json")
            intervals_path.write_text(
                json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", "utf-8"
            )

        with _Stage("schedule") as stage:
            trace_path = stage.track(out_dir / "schedule_trace.jsonl")
            events = schedule(
                ordered, config.batch_size, derive_seed(config.seed, "stage:schedule")
            )
            write_trace(events, trace_path)

        with _Stage("instruct") as stage:
            instructions_path = stage.track(out_dir / "instructions.jsonl")
            records = build_instruction_dataset(
                balanced, config.per_direction, derive_seed(config.seed, "stage:instruct")
            )
            write_instructions(records, instructions_path)

        artifacts = {
            name: digest
            for name, digest in digest_tree(out_dir).items()
            if name not in ("manifest.json", "mtpipe.lock")
        }
        manifest = RunManifest(
            config=config.snapshot(),
            inputs=inputs,
            artifacts=artifacts,
        )
        manifest.save(out_dir / "manifest.json")
    return manifest
