from __future__ import annotations

import threading
from pathlib import Path

import pytest
from hypothesis import settings

from umlsqa.umls import FileCache, FixtureUmlsProvider, UmlsClient

settings.register_profile("ci", max_examples=50, deadline=None)
settings.load_profile("ci")

FIXTURES = Path(__file__).parent / "fixtures"
UMLS_FIXTURES = FIXTURES / "umls"
PIPELINE_FIXTURES = FIXTURES / "pipeline"


@pytest.fixture
def umls_fixture_dir() -> Path:
    return UMLS_FIXTURES


@pytest.fixture
def pipeline_fixture_dir() -> Path:
    return PIPELINE_FIXTURES


class CountingUmlsProvider:
    """Wraps a provider and counts raw calls per (kind, query)."""

    def __init__(self, inner):
        self.inner = inner
        self.calls: dict[tuple[str, str], int] = {}
        self._lock = threading.Lock()

    def describe(self) -> str:
        return f"umls:counting:{self.inner.describe()}"

    def _count(self, kind: str, query: str):
        with self._lock:
            self.calls[(kind, query)] = self.calls.get((kind, query), 0) + 1

    @property
    def total_calls(self) -> int:
        return sum(self.calls.values())

    def search(self, term):
        self._count("search", term)
        return self.inner.search(term)

    def definitions(self, cui):
        self._count("definitions", cui)
        return self.inner.definitions(cui)

    def relations(self, cui):
        self._count("relations", cui)
        return self.inner.relations(cui)


@pytest.fixture
def counting_umls_provider() -> CountingUmlsProvider:
    return CountingUmlsProvider(FixtureUmlsProvider(UMLS_FIXTURES))


@pytest.fixture
def fixture_umls_client() -> UmlsClient:
    return UmlsClient(FixtureUmlsProvider(UMLS_FIXTURES))


@pytest.fixture
def cached_umls_client(tmp_path, counting_umls_provider):
    cache = FileCache(tmp_path / "umls-cache")
    return UmlsClient(counting_umls_provider, cache=cache), counting_umls_provider
