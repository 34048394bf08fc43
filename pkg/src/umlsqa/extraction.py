"""Medical terminology extraction via instruction prompts.

Two prompting techniques are supported: direct extraction returns only
terminologies literally present in the question, indirect extraction
returns contextually related terminologies (which is how abbreviations
such as "PAD" get expanded). The prompt bodies are frozen constants;
tests pin their digests.

Model output is requested as JSON but real models wrap it in prose and
code fences, so parsing scans for the first well-formed object instead
of requiring clean output. The output is sent as a single user message.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum

from .errors import ExtractionParseError, ValidationError
from .providers import ChatProvider

logger = logging.getLogger(__name__)

TERMS_KEY = "medical terminologies"

# Prompt bodies are contractual: do not edit without updating the golden
# digests in the test suite.
_DIRECT_TEMPLATE = (
    "Only return the medical terminologies contained in the input question.\n"
    "Please return in JSON format.\n"
    "Output Format:\n"
    "{{\n"
    '  "medical terminologies": ["<name>", "<name>"]\n'
    "}}\n"
    "Please only return the JSON format information.\n"
    "Input: {question}\n"
    "Output:"
)

_INDIRECT_TEMPLATE = (
    "Return medical terminologies related to the input question.\n"
    "Please return in JSON format.\n"
    "Output Format:\n"
    "{{\n"
    '  "medical terminologies": ["<name>", "<name>"]\n'
    "}}\n"
    "Please only return the JSON format information.\n"
    "Input: {question}\n"
    "Output:"
)

DEFAULT_RETRY_BUDGET = 2
EXTRACTION_TEMPERATURE = 0.0


class ExtractionMode(Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"


@dataclass(frozen=True)
class ExtractedTerm:
    """One extracted terminology surface, in model output order."""

    surface: str
    mode: ExtractionMode
    ordinal: int


def build_extraction_prompt(question: str, mode: ExtractionMode) -> str:
    """Render the frozen prompt template for the given mode."""
    if not question or not question.strip():
        raise ValidationError("extraction question must be non-empty")
    template = _DIRECT_TEMPLATE if mode is ExtractionMode.DIRECT else _INDIRECT_TEMPLATE
    return template.format(question=question)


def parse_extraction_output(raw: str) -> list[str]:
    """Pull the term list out of arbitrary model output.

    Scans for the first well-formed JSON object in ``raw`` (prose, code
    fences and trailing text are tolerated), then reads the string array
    under the "medical terminologies" key. Strings are trimmed and empty
    entries dropped.
    """
    obj = _first_json_object(raw)
    if obj is None:
        raise ExtractionParseError("no JSON object found in model output", raw=raw)
    if TERMS_KEY not in obj:
        raise ExtractionParseError(f"JSON object lacks the {TERMS_KEY!r} key", raw=raw)
    terms = obj[TERMS_KEY]
    if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
        raise ExtractionParseError(f"{TERMS_KEY!r} is not an array of strings", raw=raw)
    return [t.strip() for t in terms if t.strip()]


def _first_json_object(raw: str) -> dict | None:
    decoder = json.JSONDecoder()
    idx = raw.find("{")
    while idx != -1:
        try:
            value, _ = decoder.raw_decode(raw, idx)
        except json.JSONDecodeError:
            idx = raw.find("{", idx + 1)
            continue
        if isinstance(value, dict):
            return value
        idx = raw.find("{", idx + 1)
    return None


def extract_terms(
    question: str,
    mode: ExtractionMode,
    llm: ChatProvider,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> list[ExtractedTerm]:
    """Extract terminologies from a question via the given chat provider.

    Deduplicates case-insensitively keeping the first occurrence, so
    direct extraction's repeated surfaces do not multiply the UMLS
    retrieval steps. Parse failures are retried up to ``retry_budget``
    additional calls; when the budget is exhausted the documented
    fallback is an empty list plus a logged warning. Provider transport
    failures propagate.
    """
    prompt = build_extraction_prompt(question, mode)
    messages = [{"role": "user", "content": prompt}]
    attempts = 1 + max(0, retry_budget)
    surfaces: list[str] | None = None
    for attempt in range(attempts):
        raw = llm.complete(messages, temperature=EXTRACTION_TEMPERATURE)
        try:
            surfaces = parse_extraction_output(raw)
            break
        except ExtractionParseError as exc:
            logger.debug("extraction parse failure (attempt %d/%d): %s", attempt + 1, attempts, exc)
    if surfaces is None:
        logger.warning(
            "extraction output unparseable after %d attempts; falling back to no terms", attempts
        )
        return []

    terms: list[ExtractedTerm] = []
    seen: set[str] = set()
    for surface in surfaces:
        key = surface.lower()
        if key in seen:
            continue
        seen.add(key)
        terms.append(ExtractedTerm(surface=surface, mode=mode, ordinal=len(terms)))
    return terms
