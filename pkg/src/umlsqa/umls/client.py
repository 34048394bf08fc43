"""UMLS concept linking, definitions and relation retrieval.

A low-level provider answers three raw queries (term search, definitions
by CUI, relations by CUI) and can be HTTP-backed, fixture-backed or
recording (see ``fixtures``). ``UmlsClient`` layers the domain logic on
top: top-ranked concept linking, English-definition priority, relation
capping and dedup, plus persistent caching of the raw responses.

Definition language is decided by an explicit ``language`` field when
the response carries one (``"ENG"`` means English), otherwise by a
vocabulary-name heuristic: sources whose abbreviation ends in a known
translation suffix (MSHSPA, MDRFRE, SCTSPA, ...) are non-English and
everything else counts as English.
"""

from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import requests

from ..errors import CredentialError, ProviderError, ValidationError
from .cache import FileCache

logger = logging.getLogger(__name__)

CUI_PATTERN = re.compile(r"^C\d{7}$")
DEFAULT_RELATION_CAP = 25
DEFAULT_DEFINITION_PRIORITY = ("MSH", "NCI", "ICF")
DEFAULT_BASE_URL = "https://uts-ws.nlm.nih.gov/rest"
API_KEY_ENV = "UMLS_API_KEY"

# Translation-source suffixes observed in Metathesaurus vocabulary
# abbreviations (MSHSPA, MDRFRE, SCTSPA, ...).
_NON_ENGLISH_SUFFIXES = (
    "SPA", "FRE", "GER", "CZE", "POR", "ITA", "JPN", "RUS", "DUT",
    "FIN", "NOR", "SWE", "POL", "HUN", "KOR", "CHI", "EST", "GRE",
    "HEB", "LAV", "SCR", "TUR", "UKR", "DAN", "ARA", "BAQ",
)


def is_cui(value: str) -> bool:
    return bool(CUI_PATTERN.match(value))


def is_english_source(item: dict) -> bool:
    language = item.get("language")
    if language is not None:
        return language == "ENG"
    source = item.get("rootSource", "")
    return not (len(source) > 3 and source.endswith(_NON_ENGLISH_SUFFIXES))


@dataclass(frozen=True)
class Definition:
    text: str
    source_vocabulary: str


@dataclass(frozen=True)
class Relation:
    label: str
    related_name: str
    related_cui: str | None
    source_vocabulary: str


@dataclass(frozen=True)
class ConceptRecord:
    """A linked UMLS concept with its prioritized definition and capped
    relation list."""

    cui: str
    preferred_name: str
    definition: Definition | None = None
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        if not is_cui(self.cui):
            raise ValidationError(f"malformed CUI: {self.cui!r}")

    def to_dict(self) -> dict:
        return {
            "cui": self.cui,
            "preferred_name": self.preferred_name,
            "definition": (
                {"text": self.definition.text, "source_vocabulary": self.definition.source_vocabulary}
                if self.definition
                else None
            ),
            "relations": [
                {
                    "label": r.label,
                    "related_name": r.related_name,
                    "related_cui": r.related_cui,
                    "source_vocabulary": r.source_vocabulary,
                }
                for r in self.relations
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ConceptRecord":
        definition = obj.get("definition")
        return cls(
            cui=obj["cui"],
            preferred_name=obj["preferred_name"],
            definition=Definition(**definition) if definition else None,
            relations=tuple(Relation(**r) for r in obj.get("relations", [])),
        )


@runtime_checkable
class UmlsProvider(Protocol):
    """Raw query interface; every method returns provider-shaped items."""

    def search(self, term: str) -> list[dict]: ...

    def definitions(self, cui: str) -> list[dict]: ...

    def relations(self, cui: str) -> list[dict]: ...

    def describe(self) -> str: ...


class HttpUmlsProvider:
    """Live UMLS REST provider.

    Three attempts with exponential backoff per request, honoring
    Retry-After on rate limits. The API key is read from the
    ``UMLS_API_KEY`` environment variable unless passed explicitly.
    """

    RETRIES = 3

    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        api_key: str | None = None,
        version: str = "current",
        timeout: float = 30.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.version = version
        self.timeout = timeout
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._session = requests.Session()

    def describe(self) -> str:
        return f"umls:http:{self.base_url}"

    def search(self, term: str) -> list[dict]:
        data = self._get(f"search/{self.version}", {"string": term})
        result = data.get("result", {})
        return list(result.get("results", []))

    def definitions(self, cui: str) -> list[dict]:
        data = self._get(f"content/{self.version}/CUI/{cui}/definitions", {}, allow_missing=True)
        return list(data.get("result", []))

    def relations(self, cui: str) -> list[dict]:
        data = self._get(f"content/{self.version}/CUI/{cui}/relations", {}, allow_missing=True)
        return list(data.get("result", []))

    def _get(self, endpoint: str, params: dict, allow_missing: bool = False) -> dict:
        url = f"{self.base_url}/{endpoint}"
        query = dict(params)
        query["apiKey"] = self._api_key
        last_exc: Exception | None = None
        for attempt in range(self.RETRIES):
            try:
                resp = self._session.get(url, params=query, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                if attempt < self.RETRIES - 1:
                    time.sleep(min(4.0, 0.5 * 2**attempt))
                continue
            if resp.status_code in (401, 403):
                raise CredentialError(
                    f"UMLS endpoint rejected credentials (HTTP {resp.status_code}); "
                    f"set ${API_KEY_ENV} to a licensed key"
                )
            if resp.status_code == 404 and allow_missing:
                # UMLS answers 404 for CUIs with no definitions/relations.
                return {"result": []}
            if resp.status_code == 429 or resp.status_code >= 500:
                last_exc = ProviderError(f"UMLS endpoint returned HTTP {resp.status_code}")
                if attempt < self.RETRIES - 1:
                    retry_after = resp.headers.get("Retry-After")
                    try:
                        delay = min(30.0, float(retry_after)) if retry_after else 0.5 * 2**attempt
                    except ValueError:
                        delay = 0.5 * 2**attempt
                    time.sleep(delay)
                continue
            if resp.status_code != 200:
                raise ProviderError(f"UMLS endpoint returned HTTP {resp.status_code} for {endpoint}")
            try:
                return resp.json()
            except ValueError as exc:
                raise ProviderError(f"UMLS endpoint returned non-JSON payload for {endpoint}") from exc
        raise ProviderError(f"UMLS endpoint unreachable after {self.RETRIES} attempts: {last_exc}")


class UmlsClient:
    """Domain-level UMLS operations over a raw provider, with caching."""

    def __init__(
        self,
        provider: UmlsProvider,
        cache: FileCache | None = None,
        definition_priority: tuple[str, ...] = DEFAULT_DEFINITION_PRIORITY,
        relation_cap: int = DEFAULT_RELATION_CAP,
    ):
        if relation_cap < 1:
            raise ValidationError(f"relation cap must be >= 1, got {relation_cap}")
        self.provider = provider
        self.cache = cache
        self.definition_priority = tuple(definition_priority)
        self.relation_cap = relation_cap

    def describe(self) -> str:
        return self.provider.describe()

    def _query(self, kind: str, query: str, fetch_fn) -> list[dict]:
        if self.cache is None:
            return fetch_fn()
        return self.cache.get_or_fetch((query, kind), fetch_fn)

    def link_concept(self, term: str) -> tuple[str, str] | None:
        """Link a terminology surface to (cui, preferred_name).

        Returns the top-ranked search result, or None when the search
        comes back empty. Surfaces that UMLS knows under a different
        preferred name still link (e.g. "stroke" resolves to the
        "Cerebrovascular accident" concept).
        """
        if not term or not term.strip():
            raise ValidationError("search term must be non-empty")
        term = term.strip()
        items = self._query("search", term.lower(), lambda: self.provider.search(term))
        for item in items:
            cui = item.get("ui", "")
            if cui == "NONE":  # UMLS empty-result sentinel
                return None
            if is_cui(cui):
                return cui, item.get("name", "")
        return None

    def fetch_definition(self, cui: str) -> Definition | None:
        """Fetch the prioritized English definition for a CUI.

        English definitions are filtered first; the configured source
        priority list picks among them (first listed vocabulary with a
        definition wins), falling back to the first English definition
        in response order. None when no English definition exists.
        """
        self._require_cui(cui)
        items = self._query("definitions", cui, lambda: self.provider.definitions(cui))
        english = [item for item in items if is_english_source(item)]
        if not english:
            return None
        for vocab in self.definition_priority:
            for item in english:
                if item.get("rootSource") == vocab:
                    return Definition(text=item.get("value", ""), source_vocabulary=vocab)
        first = english[0]
        return Definition(text=first.get("value", ""), source_vocabulary=first.get("rootSource", ""))

    def fetch_relations(self, cui: str, cap: int | None = None) -> list[Relation]:
        """Fetch at most ``cap`` relations for a CUI.

        Response order is preserved and duplicates on (label,
        related_name) are collapsed before the cap applies; there is no
        relevance ranking beyond the provider's own ordering.
        """
        self._require_cui(cui)
        cap = self.relation_cap if cap is None else cap
        if cap < 1:
            raise ValidationError(f"relation cap must be >= 1, got {cap}")
        items = self._query("relations", cui, lambda: self.provider.relations(cui))
        relations: list[Relation] = []
        seen: set[tuple[str, str]] = set()
        for item in items:
            # RELA ("may_be_treated_by") when present, else the generic
            # relation label ("RO", "RB", ...).
            label = item.get("additionalRelationLabel")
            if not label or label == "NONE":
                label = item.get("relationLabel") or ""
            related_name = item.get("relatedIdName", "")
            key = (label, related_name)
            if key in seen:
                continue
            seen.add(key)
            relations.append(
                Relation(
                    label=label,
                    related_name=related_name,
                    related_cui=_cui_from_uri(item.get("relatedId")),
                    source_vocabulary=item.get("rootSource", ""),
                )
            )
            if len(relations) >= cap:
                break
        return relations

    def fetch_concept(self, term: str, cap: int | None = None) -> ConceptRecord | None:
        """Link a term and assemble its full ConceptRecord, or None when
        the term has no UMLS match."""
        linked = self.link_concept(term)
        if linked is None:
            logger.info("no UMLS concept for term %r; skipping", term)
            return None
        cui, name = linked
        return ConceptRecord(
            cui=cui,
            preferred_name=name,
            definition=self.fetch_definition(cui),
            relations=tuple(self.fetch_relations(cui, cap)),
        )

    def _require_cui(self, cui: str) -> None:
        if not is_cui(cui):
            raise ValidationError(f"malformed CUI: {cui!r}")


def _cui_from_uri(uri: str | None) -> str | None:
    if not uri:
        return None
    tail = uri.rstrip("/").rsplit("/", 1)[-1]
    return tail if is_cui(tail) else None
