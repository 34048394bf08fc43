"""Automatic scoring: tokenization, ROUGE, BERTScore, report assembly."""

from .bertscore import bertscore, cosine_similarity_matrix, greedy_match_scores
from .report import (
    METRIC_NAMES,
    TABLE_COLUMNS,
    MetricReport,
    PairScores,
    render_table,
    report_records,
    score_answer_set,
    score_pair,
)
from .rouge import PRF, f1_score, lcs_length, rouge_l, rouge_n
from .text import TokenSequence, tokenize

__all__ = [
    "METRIC_NAMES",
    "TABLE_COLUMNS",
    "MetricReport",
    "PRF",
    "PairScores",
    "TokenSequence",
    "bertscore",
    "cosine_similarity_matrix",
    "f1_score",
    "greedy_match_scores",
    "lcs_length",
    "render_table",
    "report_records",
    "rouge_l",
    "rouge_n",
    "score_answer_set",
    "score_pair",
    "tokenize",
]
