"""LiveQA corpus ingestion and experiment subsets.

Two on-disk layouts are supported:

* ``normalized-jsonl`` -- the package's interchange format, UTF-8, one
  record per line: ``{"id", "question", "reference_answers", "source_tag"}``.
* ``trec-xml`` -- the TREC LiveQA medical-task packaging. Element mapping:
  each ``NLM-QUESTION`` (attribute ``qid``/``questionid`` -> id when
  present), question text from ``NIST-PARAPHRASE`` falling back to
  ``Original-Question/MESSAGE`` then ``MESSAGE``/``SUBJECT``; reference
  answers from every ``ANSWER`` element under ``ReferenceAnswers``
  (``ReferenceAnswer`` or ``RefAnswer`` children), in document order.

Corpora are immutable after load and safe to share across workers.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NotFoundError, ValidationError

NORMALIZED_JSONL = "normalized-jsonl"
TREC_XML = "trec-xml"
FORMATS = (NORMALIZED_JSONL, TREC_XML)


@dataclass(frozen=True)
class QARecord:
    """One consumer-health question with optional reference answers."""

    id: str
    question_text: str
    reference_answers: tuple[str, ...] = ()
    source_tag: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValidationError("record id must be non-empty")
        if not self.question_text.strip():
            raise ValidationError(f"record {self.id!r}: question text is empty")


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of QARecords."""

    name: str
    records: tuple[QARecord, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        dupes = []
        for rec in self.records:
            if rec.id in seen:
                dupes.append(rec.id)
            seen.add(rec.id)
        if dupes:
            raise ValidationError(f"duplicate record ids: {sorted(set(dupes))}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def by_id(self, record_id: str) -> QARecord:
        for rec in self.records:
            if rec.id == record_id:
                return rec
        raise NotFoundError(f"unknown record id: {record_id!r}")


def load_corpus(path: str | Path, format: str = NORMALIZED_JSONL) -> Corpus:
    """Load a corpus file in the declared format.

    Ids come from the source when present, otherwise from 1-based
    position. Reference answers keep their source order.
    """
    path = Path(path)
    if format not in FORMATS:
        raise ValidationError(f"unknown corpus format {format!r}; expected one of {FORMATS}")
    if not path.exists():
        raise ValidationError(f"corpus file not found: {path}")
    if format == NORMALIZED_JSONL:
        records = _parse_jsonl(path)
    else:
        records = _parse_trec_xml(path)
    return Corpus(name=path.stem, records=tuple(records))


def save_corpus(corpus: Corpus, path: str | Path) -> Path:
    """Write a corpus in the normalized JSONL interchange format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fp:
        for rec in corpus.records:
            fp.write(
                json.dumps(
                    {
                        "id": rec.id,
                        "question": rec.question_text,
                        "reference_answers": list(rec.reference_answers),
                        "source_tag": rec.source_tag,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return path


def select_subset(corpus: Corpus, ids: list[str], suffix: str = "-subset") -> Corpus:
    """Select the given records, preserving corpus order.

    The result has exactly ``len(ids)`` records regardless of the order
    the ids are passed in. Unknown or duplicated ids are rejected.
    """
    wanted = set(ids)
    if len(wanted) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate ids in subset request: {dupes}")
    known = {rec.id for rec in corpus.records}
    missing = sorted(wanted - known)
    if missing:
        raise ValidationError(f"ids not present in corpus {corpus.name!r}: {missing}")
    picked = tuple(rec for rec in corpus.records if rec.id in wanted)
    return Corpus(name=corpus.name + suffix, records=picked)


def _parse_jsonl(path: Path) -> list[QARecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc
            if not isinstance(obj, dict):
                raise ValidationError(f"{path}:{lineno}: expected an object, got {type(obj).__name__}")
            try:
                rec = QARecord(
                    id=str(obj.get("id") or len(records) + 1),
                    question_text=obj["question"],
                    reference_answers=tuple(obj.get("reference_answers") or ()),
                    source_tag=obj.get("source_tag", ""),
                )
            except KeyError as exc:
                raise ValidationError(f"{path}:{lineno}: missing field {exc}") from exc
            records.append(rec)
    _check_duplicate_ids(records, str(path))
    return records


def _text(elem: ET.Element | None) -> str:
    return "".join(elem.itertext()).strip() if elem is not None else ""


def _parse_trec_xml(path: Path) -> list[QARecord]:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ValidationError(f"{path}: malformed XML: {exc}") from exc
    root = tree.getroot()
    questions = root.findall(".//NLM-QUESTION")
    records = []
    for pos, q in enumerate(questions, start=1):
        qid = q.get("qid") or q.get("questionid") or str(pos)
        text = _text(q.find("NIST-PARAPHRASE"))
        if not text:
            text = _text(q.find("Original-Question/MESSAGE"))
        if not text:
            text = _text(q.find("MESSAGE"))
        if not text:
            text = _text(q.find("SUBJECT"))
        if not text:
            raise ValidationError(f"{path}: NLM-QUESTION {qid!r} has no question text")
        answers = [_text(a) for a in q.findall(".//ReferenceAnswers//ANSWER")]
        answers = [a for a in answers if a]
        records.append(
            QARecord(
                id=qid,
                question_text=text,
                reference_answers=tuple(answers),
                source_tag="trec-xml",
            )
        )
    _check_duplicate_ids(records, str(path))
    return records


def _check_duplicate_ids(records: list[QARecord], source: str) -> None:
    seen: set[str] = set()
    dupes: set[str] = set()
    for rec in records:
        if rec.id in seen:
            dupes.add(rec.id)
        seen.add(rec.id)
    if dupes:
        raise ValidationError(f"{source}: duplicate record ids: {sorted(dupes)}")
