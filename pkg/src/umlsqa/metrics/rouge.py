"""ROUGE-N and ROUGE-L over token sequences.

ROUGE-N uses clipped n-gram counts (multiset intersection); ROUGE-L uses
the longest common subsequence with a beta=1 F-measure. Both operate on
pre-tokenized sequences so the tokenizer stays a single documented
choice (see ``text.tokenize``).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..errors import ValidationError
from .text import TokenSequence


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngrams(tokens: TokenSequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: TokenSequence, reference: TokenSequence, n: int) -> PRF:
    """Clipped n-gram overlap precision/recall/F1.

    Sequences shorter than ``n`` contribute no n-grams and score 0.
    """
    if n < 1:
        raise ValidationError(f"rouge_n requires n >= 1, got {n}")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    overlap = sum((cand & ref).values())
    precision = overlap / max(1, sum(cand.values()))
    recall = overlap / max(1, sum(ref.values()))
    return PRF(precision, recall, f1_score(precision, recall))


def lcs_length(a: TokenSequence, b: TokenSequence) -> int:
    """Longest common subsequence length, two-row dynamic program."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: TokenSequence, reference: TokenSequence) -> PRF:
    """LCS-based precision/recall/F1 (beta = 1)."""
    length = lcs_length(candidate, reference)
    precision = length / len(candidate) if candidate else 0.0
    recall = length / len(reference) if reference else 0.0
    return PRF(precision, recall, f1_score(precision, recall))
