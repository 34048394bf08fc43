"""Blind pairwise review: dimensions, verdicts, slot assignment.

Reviewers compare two anonymized answers per question on four
dimensions. Which system sits in slot A is decided per question by a
seeded hash, persisted server-side only, and never serialized into any
reviewer-facing payload.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from ..dataset import QARecord
from ..errors import ValidationError

AUGMENTED = "augmented"
BASELINE = "baseline"
ROLES = (AUGMENTED, BASELINE)


class Dimension(Enum):
    FACTUALITY = "Factuality"
    COMPLETENESS = "Completeness"
    READABILITY = "Readability"
    RELEVANCE = "Relevance"


class Verdict(Enum):
    SLOT_A = "slot_a"
    TIE = "tie"
    SLOT_B = "slot_b"


@dataclass(frozen=True)
class BlindedPair:
    """One question with two anonymized answers.

    ``slot_a_role`` records which system occupies slot A ("augmented" or
    "baseline"); it stays server-side.
    """

    question_id: str
    question_text: str
    slot_a_text: str
    slot_b_text: str
    slot_a_role: str

    def reviewer_payload(self) -> dict:
        """The only shape reviewers ever see: no assignment, no system
        or model identifiers."""
        return {
            "question_id": self.question_id,
            "question_text": self.question_text,
            "slot_a_text": self.slot_a_text,
            "slot_b_text": self.slot_b_text,
        }


@dataclass(frozen=True)
class Judgment:
    """One reviewer's four-dimension verdict on one blinded pair."""

    reviewer_id: str
    question_id: str
    verdicts: tuple[tuple[Dimension, Verdict], ...]
    submitted_at: str = ""

    @classmethod
    def from_wire(cls, reviewer_id: str, question_id: str, verdicts: dict[str, str]) -> "Judgment":
        """Build from wire-format verdicts, enforcing exactly the four
        dimensions. Missing dimensions are listed by name."""
        if not reviewer_id or not reviewer_id.strip():
            raise ValidationError("reviewer token must be non-empty")
        parsed: dict[Dimension, Verdict] = {}
        unknown = []
        for name, value in verdicts.items():
            try:
                dim = Dimension(name)
            except ValueError:
                unknown.append(name)
                continue
            try:
                parsed[dim] = Verdict(value)
            except ValueError:
                raise ValidationError(
                    f"invalid verdict {value!r} for {name}; expected one of "
                    f"{[v.value for v in Verdict]}"
                ) from None
        if unknown:
            raise ValidationError(f"unknown dimensions: {sorted(unknown)}")
        missing = [dim.value for dim in Dimension if dim not in parsed]
        if missing:
            raise ValidationError(f"judgment is missing dimensions: {missing}")
        return cls(
            reviewer_id=reviewer_id,
            question_id=question_id,
            verdicts=tuple(sorted(parsed.items(), key=lambda kv: kv[0].value)),
            submitted_at=datetime.now(timezone.utc).isoformat(),
        )

    def verdict_map(self) -> dict[Dimension, Verdict]:
        return dict(self.verdicts)


def slot_a_role(seed: int, question_id: str) -> str:
    """Seeded, platform-stable per-question assignment."""
    digest = hashlib.sha256(f"{seed}:{question_id}".encode("utf-8")).digest()
    return AUGMENTED if digest[0] % 2 == 0 else BASELINE


def assign_blinding(
    pairs: list[tuple[QARecord, str, str]], seed: int
) -> list[BlindedPair]:
    """Blind a list of (question, augmented answer, baseline answer).

    The same seed and input always produce the same assignment. Empty
    answers are rejected, naming the offending question.
    """
    blinded = []
    for record, augmented_text, baseline_text in pairs:
        if not augmented_text.strip() or not baseline_text.strip():
            raise ValidationError(f"question {record.id!r} has an empty answer; cannot blind")
        role = slot_a_role(seed, record.id)
        if role == AUGMENTED:
            slot_a, slot_b = augmented_text, baseline_text
        else:
            slot_a, slot_b = baseline_text, augmented_text
        blinded.append(
            BlindedPair(
                question_id=record.id,
                question_text=record.question_text,
                slot_a_text=slot_a,
                slot_b_text=slot_b,
                slot_a_role=role,
            )
        )
    return blinded
