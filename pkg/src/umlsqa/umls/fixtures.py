"""Fixture-backed and recording UMLS providers.

UMLS requires licensed credentials, so CI and the test suite run
entirely on recorded fixtures: one self-describing JSON file per query,
``{"kind", "query", "response"}``, named like cache entries. A recording
provider wraps any live provider and persists every response it sees,
which is how fixture sets are produced (`umlsqa umls record-fixtures`).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from ..errors import ProviderError, StorageError
from .cache import _filename
from .client import UmlsProvider

logger = logging.getLogger(__name__)


def fixture_path(root: Path, kind: str, query: str) -> Path:
    return Path(root) / _filename((query.lower(), kind))


def write_fixture(root: Path, kind: str, query: str, response: list[dict]) -> Path:
    root = Path(root)
    try:
        root.mkdir(parents=True, exist_ok=True)
        path = fixture_path(root, kind, query)
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(
                {"kind": kind, "query": query.lower(), "response": response},
                fp,
                ensure_ascii=False,
                indent=1,
            )
            fp.write("\n")
    except OSError as exc:
        raise StorageError(f"cannot write fixture for ({kind}, {query!r}): {exc}") from exc
    return path


class FixtureUmlsProvider:
    """Replays recorded responses; raises ProviderError on missing fixtures."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def describe(self) -> str:
        return f"umls:fixtures:{self.root}"

    def _load(self, kind: str, query: str) -> list[dict]:
        path = fixture_path(self.root, kind, query)
        if not path.exists():
            raise ProviderError(f"no recorded fixture for ({kind}, {query!r}) under {self.root}")
        try:
            with open(path, "r", encoding="utf-8") as fp:
                return json.load(fp)["response"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ProviderError(f"corrupt fixture {path}: {exc}") from exc

    def search(self, term: str) -> list[dict]:
        return self._load("search", term)

    def definitions(self, cui: str) -> list[dict]:
        return self._load("definitions", cui)

    def relations(self, cui: str) -> list[dict]:
        return self._load("relations", cui)


class RecordingUmlsProvider:
    """Delegates to a live provider and records every response."""

    def __init__(self, live: UmlsProvider, root: str | Path):
        self.live = live
        self.root = Path(root)

    def describe(self) -> str:
        return f"umls:recording:{self.live.describe()}"

    def _record(self, kind: str, query: str, response: list[dict]) -> list[dict]:
        path = write_fixture(self.root, kind, query, response)
        logger.info("recorded %s fixture: %s", kind, path.name)
        return response

    def search(self, term: str) -> list[dict]:
        return self._record("search", term, self.live.search(term))

    def definitions(self, cui: str) -> list[dict]:
        return self._record("definitions", cui, self.live.definitions(cui))

    def relations(self, cui: str) -> list[dict]:
        return self._record("relations", cui, self.live.relations(cui))
