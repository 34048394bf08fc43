"""De-blinding and four-dimension win/tie/loss aggregation.

When several reviewers judged the same question, each dimension is
settled by per-question majority; a tied vote collapses to Tie.
Percentages are counts over judged questions x100; display rounding uses
the largest-remainder method so each dimension's triple sums to exactly
100 points.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ..errors import ValidationError
from .blinding import AUGMENTED, BASELINE, Dimension, Judgment, Verdict

TIE = "tie"
OUTCOMES = (AUGMENTED, TIE, BASELINE)


@dataclass(frozen=True)
class DimensionRates:
    """Exact percentages for one dimension (may be fractional)."""

    augmented_pct: float
    tie_pct: float
    baseline_pct: float

    def rounded(self) -> tuple[int, int, int]:
        a, t, b = largest_remainder([self.augmented_pct, self.tie_pct, self.baseline_pct], 100)
        return a, t, b


@dataclass(frozen=True)
class WinRateSummary:
    question_count: int
    per_dimension: dict[Dimension, DimensionRates]

    def to_dict(self) -> dict:
        out: dict = {"question_count": self.question_count, "dimensions": {}}
        for dim in Dimension:
            rates = self.per_dimension[dim]
            rounded = rates.rounded()
            out["dimensions"][dim.value] = {
                "augmented_pct": rates.augmented_pct,
                "tie_pct": rates.tie_pct,
                "baseline_pct": rates.baseline_pct,
                "rounded": list(rounded),
            }
        return out


def largest_remainder(values: list[float], total: int) -> list[int]:
    """Round percentages to integers that sum to ``total``.

    Floors first, then hands the leftover points to the largest
    fractional parts; ties break toward earlier positions.
    """
    floors = [math.floor(v) for v in values]
    leftover = total - sum(floors)
    remainders = sorted(
        range(len(values)), key=lambda i: (-(values[i] - floors[i]), i)
    )
    for i in remainders[: max(0, leftover)]:
        floors[i] += 1
    return floors


def deblind(verdict: Verdict, slot_a_role: str) -> str:
    if verdict is Verdict.TIE:
        return TIE
    slot_b_role = BASELINE if slot_a_role == AUGMENTED else AUGMENTED
    return slot_a_role if verdict is Verdict.SLOT_A else slot_b_role


def compute_win_rates(
    judgments: list[Judgment], assignments: dict[str, str]
) -> WinRateSummary:
    """Aggregate de-blinded judgments into per-dimension win rates.

    Every judged question must have a persisted assignment; the
    denominator is the number of judged questions.
    """
    by_question: dict[str, list[Judgment]] = {}
    for j in judgments:
        if j.question_id not in assignments:
            raise ValidationError(
                f"judgment for question {j.question_id!r} has no persisted blinding assignment"
            )
        by_question.setdefault(j.question_id, []).append(j)

    question_count = len(by_question)
    counts = {dim: Counter() for dim in Dimension}
    for qid, qjudgments in by_question.items():
        role = assignments[qid]
        for dim in Dimension:
            votes = Counter(
                deblind(j.verdict_map()[dim], role) for j in qjudgments
            )
            counts[dim][_majority(votes)] += 1

    per_dimension = {}
    for dim in Dimension:
        per_dimension[dim] = DimensionRates(
            augmented_pct=_pct(counts[dim][AUGMENTED], question_count),
            tie_pct=_pct(counts[dim][TIE], question_count),
            baseline_pct=_pct(counts[dim][BASELINE], question_count),
        )
    return WinRateSummary(question_count=question_count, per_dimension=per_dimension)


def _majority(votes: Counter) -> str:
    ranked = votes.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return TIE  # tied vote collapses to Tie
    return ranked[0][0]


def _pct(count: int, total: int) -> float:
    return 100.0 * count / total if total else 0.0


def render_win_rate_table(summary: WinRateSummary) -> str:
    """Stacked-bar-ready table: one row per dimension, integer points."""
    label_width = max(len(d.value) for d in Dimension) + 2
    header = (
        "Dimension".ljust(label_width)
        + "Augmented".rjust(11)
        + "Tie".rjust(6)
        + "Baseline".rjust(10)
    )
    lines = [
        f"Win rates over {summary.question_count} judged question(s) "
        "(augmented / tie / baseline, %):",
        "",
        header,
        "-" * len(header),
    ]
    for dim in Dimension:
        a, t, b = summary.per_dimension[dim].rounded()
        lines.append(
            dim.value.ljust(label_width) + str(a).rjust(11) + str(t).rjust(6) + str(b).rjust(10)
        )
    return "\n".join(lines)
