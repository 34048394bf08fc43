"""End-to-end orchestration: extract, enrich from UMLS, prompt, generate.

Three system configurations exist per model: the plain baseline, direct
extraction + UMLS, and indirect extraction + UMLS. Baseline runs never
touch the UMLS provider.

Answer sets are line-delimited JSON with full provenance (terms,
concepts, final prompt, degradation flag), written append-first for
crash safety and rewritten in (question_id, config_id) order on
completion so identical runs produce identical bytes. Per-stage timings
are runtime diagnostics and deliberately not serialized, keeping the
artifact deterministic. A ``<out>.manifest.json`` sidecar records the
run's digests, provider identities and timestamps.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .dataset import Corpus, QARecord
from .errors import ProviderError, UmlsQaError, ValidationError
from .extraction import ExtractedTerm, ExtractionMode, extract_terms
from .providers import ChatProvider
from .umls import ConceptRecord, UmlsClient

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE_VERSION = "answer-prompt/v1"

_BASELINE_PREAMBLE = (
    "You are a medical question answering assistant. "
    "Answer the question below clearly and accurately."
)
_AUGMENTED_PREAMBLE = (
    "You are a medical question answering assistant. "
    "Answer the question below clearly and accurately, using the medical knowledge "
    "provided where it is relevant, and state which of the provided facts you used."
)

DEFAULT_CONCEPT_CHAR_BUDGET = 4000


class Augmentation(Enum):
    NONE = "none"
    DIRECT_UMLS = "direct-umls"
    INDIRECT_UMLS = "indirect-umls"

    @property
    def extraction_mode(self) -> ExtractionMode | None:
        if self is Augmentation.DIRECT_UMLS:
            return ExtractionMode.DIRECT
        if self is Augmentation.INDIRECT_UMLS:
            return ExtractionMode.INDIRECT
        return None


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_output_tokens: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class SystemConfig:
    """One row of the experiment grid."""

    model_id: str
    augmentation: Augmentation
    relation_cap: int = 25
    generation: GenerationParams = GenerationParams()
    concept_char_budget: int = DEFAULT_CONCEPT_CHAR_BUDGET

    def __post_init__(self):
        if self.relation_cap < 1:
            raise ValidationError(f"relation cap must be >= 1, got {self.relation_cap}")

    @property
    def config_id(self) -> str:
        if self.augmentation is Augmentation.NONE:
            return self.model_id
        return f"{self.model_id}+{self.augmentation.value}"

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "augmentation": self.augmentation.value,
            "relation_cap": self.relation_cap,
            "generation": {
                "temperature": self.generation.temperature,
                "max_output_tokens": self.generation.max_output_tokens,
                "seed": self.generation.seed,
            },
            "concept_char_budget": self.concept_char_budget,
        }


@dataclass
class Providers:
    """The three external dependencies a pipeline run needs."""

    extraction: ChatProvider
    generation: ChatProvider
    umls: UmlsClient | None = None

    def describe(self) -> dict:
        return {
            "extraction": self.extraction.describe(),
            "generation": self.generation.describe(),
            "umls": self.umls.describe() if self.umls else None,
        }


@dataclass
class AugmentedAnswer:
    """A generated answer plus full provenance.

    ``timings`` holds per-stage wall-clock seconds for diagnostics; it
    is not part of the serialized record.
    """

    question_id: str
    config: SystemConfig
    answer_text: str
    extracted_terms: list[ExtractedTerm] = field(default_factory=list)
    concepts: list[ConceptRecord] = field(default_factory=list)
    final_prompt: str = ""
    degraded: bool = False
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "config_id": self.config.config_id,
            "config": self.config.to_dict(),
            "degraded": self.degraded,
            "extracted_terms": [
                {"surface": t.surface, "mode": t.mode.value, "ordinal": t.ordinal}
                for t in self.extracted_terms
            ],
            "concepts": [c.to_dict() for c in self.concepts],
            "final_prompt": self.final_prompt,
            "answer_text": self.answer_text,
        }


class GenerationError(ProviderError):
    """Generation failed; carries partial provenance for diagnosis."""

    def __init__(self, message: str, provenance: dict):
        super().__init__(message)
        self.provenance = provenance


def _squash(text: str) -> str:
    return " ".join(text.split())


def _render_concept(concept: ConceptRecord, char_budget: int) -> str:
    """Render one knowledge section, dropping relations last-first when
    the section would exceed the per-concept character budget."""
    relations = list(concept.relations)
    while True:
        lines = [f"### {concept.preferred_name} ({concept.cui})"]
        if concept.definition is not None:
            lines.append(
                f"Definition ({concept.definition.source_vocabulary}): "
                f"{_squash(concept.definition.text)}"
            )
        if relations:
            lines.append("Relations:")
            lines.extend(f"- {r.label} → {_squash(r.related_name)}" for r in relations)
        section = "\n".join(lines)
        if len(section) <= char_budget or not relations:
            return section
        relations.pop()


def build_augmented_prompt(
    question: str,
    concepts: list[ConceptRecord],
    char_budget: int = DEFAULT_CONCEPT_CHAR_BUDGET,
) -> str:
    """Deterministic answer prompt.

    With concepts: preamble, a knowledge block with one section per
    concept in extraction order, then the question. Without concepts:
    the baseline prompt (preamble + question only, no knowledge block).
    """
    if not concepts:
        return f"{_BASELINE_PREAMBLE}\n\nQuestion: {question}\n\nAnswer:"
    sections = "\n\n".join(_render_concept(c, char_budget) for c in concepts)
    return (
        f"{_AUGMENTED_PREAMBLE}\n\nMedical knowledge:\n\n{sections}\n\n"
        f"Question: {question}\n\nAnswer:"
    )


def answer_question(record: QARecord, config: SystemConfig, providers: Providers) -> AugmentedAnswer:
    """Run the full per-question pipeline for one configuration.

    Terms with no UMLS match are skipped; when augmentation was
    requested but no concept could be linked at all, the baseline prompt
    is used and the answer carries a degradation flag.
    """
    timings: dict[str, float] = {}
    terms: list[ExtractedTerm] = []
    concepts: list[ConceptRecord] = []
    degraded = False

    mode = config.augmentation.extraction_mode
    if mode is not None:
        started = time.perf_counter()
        terms = extract_terms(record.question_text, mode, providers.extraction)
        timings["extraction"] = time.perf_counter() - started

        if providers.umls is None:
            raise ValidationError(
                f"config {config.config_id!r} requires a UMLS provider but none was supplied"
            )
        started = time.perf_counter()
        seen_cuis: set[str] = set()
        for term in terms:
            concept = providers.umls.fetch_concept(term.surface, cap=config.relation_cap)
            if concept is None:
                continue
            if concept.cui in seen_cuis:  # two surfaces mapping to one CUI
                continue
            seen_cuis.add(concept.cui)
            concepts.append(concept)
        timings["umls"] = time.perf_counter() - started
        if not concepts:
            degraded = True
            logger.info(
                "question %s (%s): no terms linked; using baseline prompt",
                record.id,
                config.config_id,
            )

    prompt = build_augmented_prompt(record.question_text, concepts, config.concept_char_budget)

    started = time.perf_counter()
    try:
        answer_text = providers.generation.complete(
            [{"role": "user", "content": prompt}],
            temperature=config.generation.temperature,
            max_output_tokens=config.generation.max_output_tokens,
            seed=config.generation.seed,
        )
    except UmlsQaError as exc:
        partial = AugmentedAnswer(
            question_id=record.id,
            config=config,
            answer_text="",
            extracted_terms=terms,
            concepts=concepts,
            final_prompt=prompt,
            degraded=degraded,
            timings=timings,
        )
        raise GenerationError(
            f"generation failed for question {record.id} ({config.config_id}): {exc}",
            provenance=partial.to_dict(),
        ) from exc
    timings["generation"] = time.perf_counter() - started

    return AugmentedAnswer(
        question_id=record.id,
        config=config,
        answer_text=answer_text,
        extracted_terms=terms,
        concepts=concepts,
        final_prompt=prompt,
        degraded=degraded,
        timings=timings,
    )


def load_answer_set(path: str | Path) -> list[dict]:
    """Load answer records from a (possibly unfinalized) answer-set file."""
    path = Path(path)
    if not path.exists():
        return []
    answers = []
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                answers.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed answer record: {exc}") from exc
    return answers


def _finalize_answer_set(path: Path) -> None:
    answers = load_answer_set(path)
    answers.sort(key=lambda a: (a["question_id"], a["config_id"]))
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fp:
        for answer in answers:
            fp.write(json.dumps(answer, ensure_ascii=False) + "\n")
    tmp.replace(path)


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def corpus_digest(corpus: Corpus) -> str:
    canonical = "\n".join(
        json.dumps(
            {
                "id": r.id,
                "question": r.question_text,
                "reference_answers": list(r.reference_answers),
                "source_tag": r.source_tag,
            },
            ensure_ascii=False,
            sort_keys=True,
        )
        for r in corpus.records
    )
    return _sha256_text(canonical)


def configs_digest(configs: list[SystemConfig]) -> str:
    canonical = json.dumps([c.to_dict() for c in configs], ensure_ascii=False, sort_keys=True)
    return _sha256_text(canonical)


def run_experiment(
    corpus: Corpus,
    configs: list[SystemConfig],
    providers: Providers,
    out_path: str | Path,
    max_workers: int = 1,
) -> Path:
    """Produce one answer per (record, config) into ``out_path``.

    Resumable: pairs already present in the output file are not
    regenerated, so an interrupted run can simply be re-invoked. Each
    completed answer is appended immediately; on success the file is
    rewritten in deterministic order. Per-item failures are recorded in
    the manifest and skipped; the run raises only when every attempted
    item failed.
    """
    if not corpus.records:
        raise ValidationError("cannot run an experiment over an empty corpus")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    manifest: dict = {
        "kind": "pipeline-run",
        "config_digest": configs_digest(configs),
        "corpus_digest": corpus_digest(corpus),
        "seeds": sorted({c.generation.seed for c in configs if c.generation.seed is not None}),
        "providers": providers.describe(),
        "started_at": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(out_path)],
    }

    completed = {(a["question_id"], a["config_id"]) for a in load_answer_set(out_path)}
    tasks = [
        (record, config)
        for record in corpus.records
        for config in configs
        if (record.id, config.config_id) not in completed
    ]

    failures: list[dict] = []
    write_lock = threading.Lock()

    def run_one(task: tuple[QARecord, SystemConfig]) -> bool:
        record, config = task
        try:
            answer = answer_question(record, config, providers)
        except UmlsQaError as exc:
            logger.error("item failed: %s/%s: %s", record.id, config.config_id, exc)
            with write_lock:
                failures.append(
                    {
                        "question_id": record.id,
                        "config_id": config.config_id,
                        "error": str(exc),
                        "error_type": type(exc).__name__,
                    }
                )
            return False
        line = json.dumps(answer.to_dict(), ensure_ascii=False)
        with write_lock:
            with open(out_path, "a", encoding="utf-8") as fp:
                fp.write(line + "\n")
        return True

    try:
        if max_workers <= 1:
            results = [run_one(task) for task in tasks]
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                results = list(pool.map(run_one, tasks))
    finally:
        manifest["finished_at"] = datetime.now(timezone.utc).isoformat()
        manifest["completed"] = len(load_answer_set(out_path))
        manifest["failed"] = failures
        manifest_path = out_path.with_name(out_path.name + ".manifest.json")
        with open(manifest_path, "w", encoding="utf-8") as fp:
            json.dump(manifest, fp, ensure_ascii=False, indent=1)
            fp.write("\n")

    if tasks and not any(results):
        first = failures[0]
        raise ProviderError(
            f"all {len(tasks)} pipeline items failed; first: "
            f"{first['question_id']}/{first['config_id']}: {first['error']}"
        )

    _finalize_answer_set(out_path)
    return out_path
