"""Translation quality evaluation: BLEU, LLM-rubric judging, reports."""

from .bleu import BleuScore, bleu_by_direction, corpus_bleu, corpus_bleu_details, tokenize_for_bleu
from .flores import attach_hypotheses, load_flores_subset
from .items import EvalItem, RubricScore
from .judge import AuthenticationError, ChatCompletionClient, JudgeConfig, judge, write_scores
from .report import (
    ComparisonReport,
    DirectionAggregate,
    SystemReport,
    aggregate,
    bundled_bleu_reports,
    bundled_gpt4_reports,
    comparison_report,
    load_score_table,
)
from .rubric import MAX_BATCH, ParsedScores, build_rubric_prompt, parse_scores

__all__ = [
    "AuthenticationError",
    "BleuScore",
    "ChatCompletionClient",
    "ComparisonReport",
    "DirectionAggregate",
    "EvalItem",
    "JudgeConfig",
    "MAX_BATCH",
    "ParsedScores",
    "RubricScore",
    "SystemReport",
    "aggregate",
    "attach_hypotheses",
    "bleu_by_direction",
    "build_rubric_prompt",
    "bundled_bleu_reports",
    "bundled_gpt4_reports",
    "comparison_report",
    "corpus_bleu",
    "corpus_bleu_details",
    "judge",
    "load_flores_subset",
    "load_score_table",
    "parse_scores",
    "tokenize_for_bleu",
    "write_scores",
]
