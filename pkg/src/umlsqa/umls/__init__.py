"""UMLS concept linking, definition/relation retrieval, caching, fixtures."""

from .cache import FileCache
from .client import (
    DEFAULT_DEFINITION_PRIORITY,
    DEFAULT_RELATION_CAP,
    ConceptRecord,
    Definition,
    HttpUmlsProvider,
    Relation,
    UmlsClient,
    UmlsProvider,
    is_cui,
    is_english_source,
)
from .fixtures import FixtureUmlsProvider, RecordingUmlsProvider, write_fixture

__all__ = [
    "DEFAULT_DEFINITION_PRIORITY",
    "DEFAULT_RELATION_CAP",
    "ConceptRecord",
    "Definition",
    "FileCache",
    "FixtureUmlsProvider",
    "HttpUmlsProvider",
    "RecordingUmlsProvider",
    "Relation",
    "UmlsClient",
    "UmlsProvider",
    "is_cui",
    "is_english_source",
    "write_fixture",
]
