"""Command-line interface.

Subcommands expose the pipeline stages individually (`balance`,
`vocab train`, `pack`, `schedule run`, `schedule simulate`,
`instruct build`, `eval bleu`, `eval judge`, `eval report`) plus the
end-to-end `run`. Settings come from flags, or from a TOML file via
``--config`` whose keys match PipelineConfig fields; explicit flags win
over file values. Exit codes: 0 success, 1 usage, 2 data, 3 endpoint.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import CorpusStats, Direction, balance_directions, load_corpus_dir, save_corpus_dir
from .errors import ConfigError, DataError, EndpointError, StageError
from .evaluation import (
    ChatCompletionClient,
    JudgeConfig,
    aggregate,
    attach_hypotheses,
    bleu_by_direction,
    bundled_bleu_reports,
    bundled_gpt4_reports,
    comparison_report,
    judge,
    load_flores_subset,
    load_score_table,
    write_scores,
)
from .instruct import build_instruction_dataset, write_instructions
from .packing import PackingConfig, pack, write_samples
from .pipeline import (
    CONFIG_KEYS,
    PipelineConfig,
    load_config_file,
    merge_config,
    run_pipeline,
)
from .scheduler import (
    PairBucket,
    interval_means,
    partition_intervals,
    read_trace,
    schedule,
    simulate_exposure,
    write_trace,
)
from .vocab import VocabTrainConfig, Vocabulary, grow_vocabulary, standin_base_vocabulary

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    # usage problems must map to exit code 1, not argparse's hardwired 2
    def error(self, message):
        raise ConfigError(message)


def _effective(args, keys: tuple[str, ...]) -> dict:
    """Config-file values overlaid with explicitly passed flags."""
    file_values = {}
    config_path = getattr(args, "config", None)
    if config_path:
        file_values = {k: v for k, v in load_config_file(config_path).items() if k in keys}
    flag_values = {k: getattr(args, k, None) for k in keys}
    return merge_config(file_values, flag_values)


def _require(values: dict, *keys: str) -> None:
    missing = [k for k in keys if values.get(k) is None]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")


def _parse_directions(raw: str) -> list[Direction]:
    return [Direction.parse(part.strip()) for part in raw.split(",") if part.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, "utf-8")
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def cmd_balance(args) -> int:
    values = _effective(args, ("corpus_dir", "seed", "flip_threshold"))
    _require(values, "corpus_dir", "seed")
    flip_threshold = values.get("flip_threshold", 1_000_000)
    corpora, skipped = load_corpus_dir(values["corpus_dir"])
    balanced = balance_directions(corpora, flip_threshold, values["seed"])
    out = Path(args.out)
    save_corpus_dir(balanced, out)
    stats = CorpusStats.collect(balanced, skipped)
    (out / "corpus_stats.json").write_text(stats.to_json(), "utf-8")
    print(f"balanced {len(corpora)} -> {len(balanced)} directions, {stats.total_pairs} pairs")
    return 0


def cmd_vocab_train(args) -> int:
    keys = ("corpus_dir", "seed", "base_vocab", "base_vocab_size", "target_vocab_size", "max_num")
    values = _effective(args, keys)
    _require(values, "corpus_dir", "seed", "target_vocab_size")
    corpora, _ = load_corpus_dir(values["corpus_dir"])
    if values.get("base_vocab"):
        base = Vocabulary.load(values["base_vocab"])
    else:
        base = standin_base_vocabulary(values.get("base_vocab_size", 32_000))
    vocab, shortfall = grow_vocabulary(
        base,
        corpora,
        VocabTrainConfig(
            target_size=values["target_vocab_size"],
            max_num=values.get("max_num", 1_000_000),
            seed=values["seed"],
        ),
    )
    vocab.save(args.out)
    print(f"vocabulary {len(base)} -> {len(vocab)} tokens (shortfall {shortfall}), wrote {args.out}")
    return 0


def cmd_pack(args) -> int:
    values = _effective(args, ("corpus_dir", "pack_length"))
    _require(values, "corpus_dir")
    corpora, _ = load_corpus_dir(values["corpus_dir"])
    vocab = Vocabulary.load(args.vocab)
    config = PackingConfig.for_vocabulary(vocab, values.get("pack_length", 1_024))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    total = 0
    for direction in sorted(corpora, key=str):
        samples, report = pack(corpora[direction], vocab, config)
        write_samples(
            samples, report, direction, config,
            out / f"{direction}.bin", out / f"{direction}.json",
        )
        total += len(samples)
    print(f"packed {total} samples for {len(corpora)} directions into {out}")
    return 0


def _load_counts(args) -> dict[Direction, int]:
    if args.counts:
        try:
            raw = json.loads(Path(args.counts).read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read counts {args.counts}: {exc}") from exc
        return {Direction.parse(d): int(n) for d, n in raw.items()}
    counts = {}
    for sidecar in sorted(Path(args.packed_dir).glob("*.json")):
        try:
            payload = json.loads(sidecar.read_text("utf-8"))
            counts[Direction.parse(payload["direction"])] = len(payload["pair_span_counts"])
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"malformed packing sidecar {sidecar}: {exc}") from exc
    if not counts:
        raise DataError(f"no packing sidecars under {args.packed_dir}")
    return counts


def cmd_schedule_run(args) -> int:
    values = _effective(args, ("seed", "batch_size", "s_high", "s_low", "cutover"))
    _require(values, "seed", "batch_size")
    counts = _load_counts(args)
    buckets = [PairBucket(d, n) for d, n in counts.items()]
    intervals, excluded = partition_intervals(
        buckets,
        values.get("s_high", 10_000),
        values.get("s_low", 5_000),
        values.get("cutover", 10_000),
    )
    if excluded:
        logger.warning("excluded %d empty directions", len(excluded))
    ordered = interval_means(intervals)
    events = list(schedule(ordered, values["batch_size"], values["seed"]))
    write_trace(events, args.trace)
    done = events[-1]
    print(
        f"wrote {len(events)} events to {args.trace} "
        f"({done.batches} batches, {done.samples} samples, {len(ordered)} intervals)"
    )
    return 0


def cmd_schedule_simulate(args) -> int:
    table = simulate_exposure(read_trace(args.trace))
    _emit(table.to_tsv(), args.out)
    print(
        f"{table.batches} batches, {table.samples_consumed} samples, "
        f"{len(table.merges)} merges",
        file=sys.stderr,
    )
    return 0


def cmd_instruct_build(args) -> int:
    values = _effective(args, ("corpus_dir", "seed", "per_direction"))
    _require(values, "corpus_dir", "seed")
    corpora, _ = load_corpus_dir(values["corpus_dir"])
    records = build_instruction_dataset(
        corpora, values.get("per_direction", 1_000), values["seed"]
    )
    write_instructions(records, args.out)
    print(f"wrote {len(records)} instruction records to {args.out}")
    return 0


def _load_eval_items(args):
    directions = _parse_directions(args.directions)
    if not directions:
        raise ConfigError("no directions given")
    items, shortfall = load_flores_subset(args.flores_dir, directions, args.per_direction)
    for direction, available in sorted(shortfall.items()):
        logger.warning("%s: only %d of %d sentences available", direction, available, args.per_direction)
    return attach_hypotheses(items, args.hyp_dir)


def cmd_eval_bleu(args) -> int:
    items = _load_eval_items(args)
    scores = bleu_by_direction(items)
    lines = ["direction\tbleu\n"]
    for direction, detail in scores.items():
        lines.append(f"{direction}\t{detail.score:.2f}\n")
    _emit("".join(lines), args.out)
    return 0


def cmd_eval_judge(args) -> int:
    keys = (
        "judge_url", "judge_model", "judge_api_key_env", "judge_timeout",
        "judge_max_retries", "judge_backoff_base", "judge_parallelism",
    )
    values = _effective(args, keys)
    _require(values, "judge_url", "judge_model")
    config = JudgeConfig(
        url=values["judge_url"],
        model=values["judge_model"],
        api_key_env=values.get("judge_api_key_env", "MTPIPE_JUDGE_API_KEY"),
        timeout=values.get("judge_timeout", 60.0),
        max_retries=values.get("judge_max_retries", 3),
        backoff_base=values.get("judge_backoff_base", 1.0),
        parallelism=values.get("judge_parallelism", 4),
    )
    items = _load_eval_items(args)
    scores = judge(items, ChatCompletionClient(config))
    write_scores(items, scores, args.out)
    by_direction: dict[str, list] = {}
    for item, score in zip(items, scores):
        by_direction.setdefault(str(item.direction), []).append(score)
    print("direction\tmean\tscored\tmissing")
    for direction, direction_scores in sorted(by_direction.items()):
        agg = aggregate(direction_scores, direction)
        print(f"{direction}\t{agg.mean:.3f}\t{agg.scored}\t{agg.missing}")
    return 0


def cmd_eval_report(args) -> int:
    if args.fixtures:
        reports = load_score_table(args.fixtures)
    elif args.bundled == "bleu":
        reports = bundled_bleu_reports()
    elif args.bundled == "gpt4":
        reports = bundled_gpt4_reports()
    else:
        raise ConfigError("give either --fixtures FILE or --bundled bleu|gpt4")
    result = comparison_report(reports, args.sort_by)
    _emit(result.to_tsv(), args.out)
    if args.figure_json:
        Path(args.figure_json).write_text(result.to_figure_json() + "\n", "utf-8")
        print(f"wrote {args.figure_json}")
    return 0


def cmd_run(args) -> int:
    values = _effective(args, tuple(sorted(CONFIG_KEYS)))
    _require(values, "corpus_dir", "out_dir", "seed", "batch_size")
    config = PipelineConfig(**values)
    manifest = run_pipeline(config)
    print(
        f"pipeline complete: {len(manifest.artifacts)} artifacts in {config.out_dir} "
        f"(manifest.json written)"
    )
    return 0


def _add_config_flag(parser) -> None:
    parser.add_argument("--config", help="TOML file with PipelineConfig keys; flags override it")


def build_parser() -> _Parser:
    parser = _Parser(prog="mtpipe", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"mtpipe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("balance", help="flip-augment a corpus directory to cover both directions")
    _add_config_flag(p)
    p.add_argument("--corpus-dir", dest="corpus_dir")
    p.add_argument("--out", required=True, help="output directory for balanced TSVs")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--flip-threshold", type=int, dest="flip_threshold")
    p.set_defaults(handler=cmd_balance)

    vocab = sub.add_parser("vocab", help="vocabulary operations")
    vsub = vocab.add_subparsers(dest="subcommand", required=True)
    p = vsub.add_parser("train", help="grow a byte-level BPE vocabulary from a corpus")
    _add_config_flag(p)
    p.add_argument("--corpus-dir", dest="corpus_dir")
    p.add_argument("--out", required=True, help="output vocabulary JSON path")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--base-vocab", dest="base_vocab", help="existing vocabulary JSON to extend")
    p.add_argument("--base-vocab-size", type=int, dest="base_vocab_size")
    p.add_argument("--target-size", type=int, dest="target_vocab_size")
    p.add_argument("--max-num", type=int, dest="max_num", help="per-language sampling cap")
    p.set_defaults(handler=cmd_vocab_train)

    p = sub.add_parser("pack", help="pack a corpus into fixed-length token samples")
    _add_config_flag(p)
    p.add_argument("--corpus-dir", dest="corpus_dir")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True, help="output directory for packed records")
    p.add_argument("--pack-length", type=int, dest="pack_length")
    p.set_defaults(handler=cmd_pack)

    sched = sub.add_parser("schedule", help="curriculum schedule operations")
    ssub = sched.add_subparsers(dest="subcommand", required=True)
    p = ssub.add_parser("run", help="emit the batch/merge trace for per-direction counts")
    _add_config_flag(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--counts", help="JSON file mapping direction to sample count")
    src.add_argument("--packed-dir", help="directory of packing sidecars to count")
    p.add_argument("--trace", required=True, help="output JSONL trace path")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--s-high", type=int, dest="s_high")
    p.add_argument("--s-low", type=int, dest="s_low")
    p.add_argument("--cutover", type=int, dest="cutover")
    p.set_defaults(handler=cmd_schedule_run)
    p = ssub.add_parser("simulate", help="replay a trace into a per-direction exposure table")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", help="output TSV path (default: stdout)")
    p.set_defaults(handler=cmd_schedule_simulate)

    instruct = sub.add_parser("instruct", help="instruction dataset operations")
    isub = instruct.add_subparsers(dest="subcommand", required=True)
    p = isub.add_parser("build", help="render the shuffled instruction-tuning JSONL")
    _add_config_flag(p)
    p.add_argument("--corpus-dir", dest="corpus_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--per-direction", type=int, dest="per_direction")
    p.set_defaults(handler=cmd_instruct_build)

    ev = sub.add_parser("eval", help="evaluation operations")
    esub = ev.add_subparsers(dest="subcommand", required=True)
    p = esub.add_parser("bleu", help="corpus BLEU per direction")
    p.add_argument("--flores-dir", required=True, help="directory of per-language sentence files")
    p.add_argument("--hyp-dir", required=True, help="directory of per-direction hypothesis files")
    p.add_argument("--directions", required=True, help="comma-separated, e.g. fr-en,de-en")
    p.add_argument("--per-direction", type=int, default=50)
    p.add_argument("--out", help="output TSV path (default: stdout)")
    p.set_defaults(handler=cmd_eval_bleu)
    p = esub.add_parser("judge", help="LLM-rubric scores per direction")
    _add_config_flag(p)
    p.add_argument("--flores-dir", required=True)
    p.add_argument("--hyp-dir", required=True)
    p.add_argument("--directions", required=True)
    p.add_argument("--per-direction", type=int, default=50)
    p.add_argument("--out", required=True, help="output scores JSONL path")
    p.add_argument("--judge-url", dest="judge_url")
    p.add_argument("--judge-model", dest="judge_model")
    p.add_argument("--api-key-env", dest="judge_api_key_env")
    p.add_argument("--timeout", type=float, dest="judge_timeout")
    p.add_argument("--max-retries", type=int, dest="judge_max_retries")
    p.add_argument("--backoff-base", type=float, dest="judge_backoff_base")
    p.add_argument("--parallelism", type=int, dest="judge_parallelism")
    p.set_defaults(handler=cmd_eval_judge)
    p = esub.add_parser("report", help="cross-system comparison table from score fixtures")
    p.add_argument("--fixtures", help="score table TSV (direction + one column per system)")
    p.add_argument("--bundled", choices=["bleu", "gpt4"], help="use a bundled score table")
    p.add_argument("--sort-by", required=True, help="system column to sort rows by")
    p.add_argument("--out", help="output TSV path (default: stdout)")
    p.add_argument("--figure-json", help="also write plot-ready series JSON here")
    p.set_defaults(handler=cmd_eval_report)

    p = sub.add_parser("run", help="run the full pipeline and write a manifest")
    _add_config_flag(p)
    p.add_argument("--corpus-dir", dest="corpus_dir")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--base-vocab", dest="base_vocab")
    p.add_argument("--base-vocab-size", type=int, dest="base_vocab_size")
    p.add_argument("--target-vocab-size", type=int, dest="target_vocab_size")
    p.add_argument("--flip-threshold", type=int, dest="flip_threshold")
    p.add_argument("--max-num", type=int, dest="max_num")
    p.add_argument("--pack-length", type=int, dest="pack_length")
    p.add_argument("--s-high", type=int, dest="s_high")
    p.add_argument("--s-low", type=int, dest="s_low")
    p.add_argument("--cutover", type=int, dest="cutover")
    p.add_argument("--per-direction", type=int, dest="per_direction")
    p.add_argument("--judge-url", dest="judge_url")
    p.add_argument("--judge-model", dest="judge_model")
    p.set_defaults(handler=cmd_run)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, EndpointError):
            return 3
        if isinstance(exc.cause, ConfigError):
            return 1
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EndpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
