"""Answer-set scoring and the six-column report table.

Scores every (question, config) pair in an answer set against its
reference answers and aggregates per config. Multi-reference policy:
each metric is computed against every reference and the scores of the
best-F1 reference are kept, independently per metric. The rendered table
has one row per config and exactly the columns R-1, R-2, R-L (ROUGE
F1s) and P, R, F1 (BERTScore), values x100 at two decimals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..dataset import Corpus
from ..errors import ValidationError
from ..providers import EmbeddingProvider
from .bertscore import bertscore
from .rouge import PRF, rouge_l, rouge_n
from .text import tokenize

logger = logging.getLogger(__name__)

METRIC_NAMES = ("rouge1", "rouge2", "rougeL", "bertscore")
TABLE_COLUMNS = ("R-1", "R-2", "R-L", "P", "R", "F1")


@dataclass(frozen=True)
class PairScores:
    question_id: str
    config_id: str
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF
    bertscore: PRF

    def metric(self, name: str) -> PRF:
        return getattr(self, name)


@dataclass
class MetricReport:
    """Per-pair scores plus per-config arithmetic means."""

    pairs: list[PairScores] = field(default_factory=list)
    config_means: dict[str, dict[str, PRF]] = field(default_factory=dict)
    excluded: list[dict] = field(default_factory=list)

    @property
    def exclusion_count(self) -> int:
        return len(self.excluded)


def _best_against_references(candidate: list[str], references: list[list[str]], metric_fn) -> PRF:
    best: PRF | None = None
    for ref in references:
        score = metric_fn(candidate, ref)
        if best is None or score.f1 > best.f1:
            best = score
    assert best is not None
    return best


def score_pair(
    answer_text: str, reference_texts: list[str], embedder: EmbeddingProvider
) -> dict[str, PRF]:
    """Score one answer against one or more references (max-F1 policy)."""
    if not reference_texts:
        raise ValidationError("scoring requires at least one reference answer")
    candidate = tokenize(answer_text)
    references = [tokenize(r) for r in reference_texts]
    return {
        "rouge1": _best_against_references(candidate, references, lambda c, r: rouge_n(c, r, 1)),
        "rouge2": _best_against_references(candidate, references, lambda c, r: rouge_n(c, r, 2)),
        "rougeL": _best_against_references(candidate, references, rouge_l),
        "bertscore": _best_against_references(
            candidate, references, lambda c, r: bertscore(c, r, embedder)
        ),
    }


def score_answer_set(
    answers: list[dict], corpus: Corpus, embedder: EmbeddingProvider
) -> MetricReport:
    """Score a loaded answer set (see ``umlsqa.pipeline``) against a corpus.

    Answers whose question lacks reference answers (or is unknown) are
    recorded as exclusions and left out of the means.
    """
    report = MetricReport()
    by_id = {rec.id: rec for rec in corpus.records}
    for answer in answers:
        qid = answer["question_id"]
        config_id = answer["config_id"]
        record = by_id.get(qid)
        if record is None:
            report.excluded.append(
                {"question_id": qid, "config_id": config_id, "reason": "question not in corpus"}
            )
            continue
        if not record.reference_answers:
            report.excluded.append(
                {"question_id": qid, "config_id": config_id, "reason": "no reference answers"}
            )
            continue
        scores = score_pair(answer["answer_text"], list(record.reference_answers), embedder)
        report.pairs.append(PairScores(question_id=qid, config_id=config_id, **scores))
    if report.excluded:
        logger.warning("excluded %d answer(s) from scoring", len(report.excluded))

    configs = sorted({p.config_id for p in report.pairs})
    for config_id in configs:
        rows = [p for p in report.pairs if p.config_id == config_id]
        means: dict[str, PRF] = {}
        for name in METRIC_NAMES:
            scores = [row.metric(name) for row in rows]
            count = len(scores)
            means[name] = PRF(
                sum(s.precision for s in scores) / count,
                sum(s.recall for s in scores) / count,
                sum(s.f1 for s in scores) / count,
            )
        report.config_means[config_id] = means
    return report


def render_table(report: MetricReport) -> str:
    """Aligned text table: config rows, R-1/R-2/R-L/P/R/F1 columns."""
    label_width = max([len("Config")] + [len(c) for c in report.config_means]) + 2
    header = "Config".ljust(label_width) + "".join(col.rjust(8) for col in TABLE_COLUMNS)
    lines = [header, "-" * len(header)]
    for config_id, means in report.config_means.items():
        cells = [
            means["rouge1"].f1,
            means["rouge2"].f1,
            means["rougeL"].f1,
            means["bertscore"].precision,
            means["bertscore"].recall,
            means["bertscore"].f1,
        ]
        row = config_id.ljust(label_width) + "".join(f"{100 * v:.2f}".rjust(8) for v in cells)
        lines.append(row)
    if report.exclusion_count:
        lines.append(f"(excluded from means: {report.exclusion_count})")
    return "\n".join(lines)


def report_records(report: MetricReport) -> list[dict]:
    """Machine-readable per-pair records plus per-config mean records."""
    records = []
    for pair in report.pairs:
        records.append(
            {
                "kind": "pair",
                "question_id": pair.question_id,
                "config_id": pair.config_id,
                **{
                    name: {
                        "precision": pair.metric(name).precision,
                        "recall": pair.metric(name).recall,
                        "f1": pair.metric(name).f1,
                    }
                    for name in METRIC_NAMES
                },
            }
        )
    for config_id, means in report.config_means.items():
        records.append(
            {
                "kind": "config-mean",
                "config_id": config_id,
                **{
                    name: {
                        "precision": means[name].precision,
                        "recall": means[name].recall,
                        "f1": means[name].f1,
                    }
                    for name in METRIC_NAMES
                },
            }
        )
    for exclusion in report.excluded:
        records.append({"kind": "excluded", **exclusion})
    return records
