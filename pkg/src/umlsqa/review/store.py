"""Review-set persistence: blinded pairs, append-only judgments, audit log.

Layout under the store directory:

* ``review_set.json`` -- pairs with hidden assignments plus the system
  labels; server-side only, never served to reviewers.
* ``judgments.jsonl`` -- append-only; the latest record per
  (reviewer, question) wins, so resubmission replaces without rewriting
  history.
* ``audit.jsonl`` -- one event per submission/overwrite.

Judgment writes are single-line appends under a lock, atomic per
(reviewer, question); reads take a snapshot of the file.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from ..errors import NotFoundError, StorageError, ValidationError
from .blinding import BlindedPair, Dimension, Judgment, Verdict

REVIEW_SET_FILE = "review_set.json"
JUDGMENTS_FILE = "judgments.jsonl"
AUDIT_FILE = "audit.jsonl"


class ReviewStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._pairs: list[BlindedPair] = []
        self.name = ""
        self.seed = 0
        self.systems: dict[str, str] = {}

    # -- creation / loading -------------------------------------------------

    @classmethod
    def create(
        cls,
        root: str | Path,
        pairs: list[BlindedPair],
        systems: dict[str, str],
        seed: int,
        name: str = "review",
    ) -> "ReviewStore":
        """Initialize a store directory from blinded pairs.

        ``systems`` maps role -> label (e.g. config id); labels exist
        for the final report only and are never sent to reviewers.
        """
        store = cls(root)
        store.root.mkdir(parents=True, exist_ok=True)
        if (store.root / REVIEW_SET_FILE).exists():
            raise ValidationError(f"review store already initialized at {store.root}")
        if not pairs:
            raise ValidationError("cannot create a review store with no pairs")
        payload = {
            "name": name,
            "seed": seed,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "systems": systems,
            "pairs": [
                {
                    "question_id": p.question_id,
                    "question_text": p.question_text,
                    "slot_a_text": p.slot_a_text,
                    "slot_b_text": p.slot_b_text,
                    "slot_a_role": p.slot_a_role,
                }
                for p in pairs
            ],
        }
        try:
            with open(store.root / REVIEW_SET_FILE, "w", encoding="utf-8") as fp:
                json.dump(payload, fp, ensure_ascii=False, indent=1)
                fp.write("\n")
        except OSError as exc:
            raise StorageError(f"cannot write review set: {exc}") from exc
        store._pairs = list(pairs)
        store.name = name
        store.seed = seed
        store.systems = dict(systems)
        return store

    @classmethod
    def load(cls, root: str | Path) -> "ReviewStore":
        store = cls(root)
        path = store.root / REVIEW_SET_FILE
        if not path.exists():
            raise ValidationError(f"no review store at {store.root} (missing {REVIEW_SET_FILE})")
        try:
            with open(path, "r", encoding="utf-8") as fp:
                payload = json.load(fp)
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"cannot read review set {path}: {exc}") from exc
        store.name = payload.get("name", "review")
        store.seed = payload.get("seed", 0)
        store.systems = payload.get("systems", {})
        store._pairs = [
            BlindedPair(
                question_id=p["question_id"],
                question_text=p["question_text"],
                slot_a_text=p["slot_a_text"],
                slot_b_text=p["slot_b_text"],
                slot_a_role=p["slot_a_role"],
            )
            for p in payload.get("pairs", [])
        ]
        return store

    # -- pairs ---------------------------------------------------------------

    @property
    def pairs(self) -> list[BlindedPair]:
        return list(self._pairs)

    def pair(self, question_id: str) -> BlindedPair:
        for p in self._pairs:
            if p.question_id == question_id:
                return p
        raise NotFoundError(f"unknown question in review set: {question_id!r}")

    def assignments(self) -> dict[str, str]:
        return {p.question_id: p.slot_a_role for p in self._pairs}

    # -- judgments -----------------------------------------------------------

    def record_judgment(self, judgment: Judgment) -> dict:
        """Persist a judgment; resubmission by the same reviewer replaces
        the earlier one and is audit-logged."""
        self.pair(judgment.question_id)  # raises NotFoundError when unknown
        with self._lock:
            replaced = any(
                j.reviewer_id == judgment.reviewer_id and j.question_id == judgment.question_id
                for j in self._read_judgments()
            )
            record = {
                "reviewer_id": judgment.reviewer_id,
                "question_id": judgment.question_id,
                "verdicts": {dim.value: verdict.value for dim, verdict in judgment.verdicts},
                "submitted_at": judgment.submitted_at,
            }
            self._append(JUDGMENTS_FILE, record)
            self._append(
                AUDIT_FILE,
                {
                    "event": "judgment_overwritten" if replaced else "judgment_recorded",
                    "reviewer_id": judgment.reviewer_id,
                    "question_id": judgment.question_id,
                    "at": datetime.now(timezone.utc).isoformat(),
                },
            )
        return {"replaced": replaced}

    def judgments(self) -> list[Judgment]:
        """Effective judgments: the latest per (reviewer, question)."""
        effective: dict[tuple[str, str], Judgment] = {}
        for j in self._read_judgments():
            effective[(j.reviewer_id, j.question_id)] = j
        return list(effective.values())

    def pending(self, reviewer_id: str) -> list[str]:
        """Question ids the reviewer has not judged yet, in the
        server-assigned review-set order."""
        done = {j.question_id for j in self.judgments() if j.reviewer_id == reviewer_id}
        return [p.question_id for p in self._pairs if p.question_id not in done]

    def progress(self, reviewer_id: str) -> dict:
        total = len(self._pairs)
        return {"judged": total - len(self.pending(reviewer_id)), "total": total}

    # -- internals -----------------------------------------------------------

    def _append(self, filename: str, record: dict) -> None:
        try:
            with open(self.root / filename, "a", encoding="utf-8") as fp:
                fp.write(json.dumps(record, ensure_ascii=False) + "\n")
                fp.flush()
        except OSError as exc:
            raise StorageError(f"cannot append to {filename}: {exc}") from exc

    def _read_judgments(self) -> list[Judgment]:
        path = self.root / JUDGMENTS_FILE
        if not path.exists():
            return []
        out = []
        try:
            with open(path, "r", encoding="utf-8") as fp:
                for line in fp:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    out.append(
                        Judgment(
                            reviewer_id=obj["reviewer_id"],
                            question_id=obj["question_id"],
                            verdicts=tuple(
                                sorted(
                                    (
                                        (Dimension(d), Verdict(v))
                                        for d, v in obj["verdicts"].items()
                                    ),
                                    key=lambda kv: kv[0].value,
                                )
                            ),
                            submitted_at=obj.get("submitted_at", ""),
                        )
                    )
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise StorageError(f"cannot read judgments from {path}: {exc}") from exc
        return out
