"""Persistent response cache: one self-describing JSON file per key.

Keys are ``(query, kind)`` pairs, e.g. ``("addison disease", "search")``
or ``("C0001403", "relations")``. Values are the raw provider responses,
so downstream transformations (definition priority, relation caps) can
change without invalidating the cache.

Writes go through a temp file + rename so readers never observe a
half-written entry; a single store lock serializes writers, which
satisfies the per-key write serialization the rest of the package
assumes. Corrupted entries are evicted and refetched.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from ..errors import StorageError

CacheKey = tuple[str, str]  # (query, kind)

_SLUG = re.compile(r"[^a-z0-9]+")


def _filename(key: CacheKey) -> str:
    query, kind = key
    slug = _SLUG.sub("-", query.lower()).strip("-")[:60] or "q"
    digest = hashlib.sha256(f"{kind}\x00{query}".encode("utf-8")).hexdigest()[:12]
    return f"{kind}__{slug}__{digest}.json"


class FileCache:
    """Directory-backed cache with get-or-fetch semantics."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create cache directory {self.root}: {exc}") from exc
        self._lock = threading.Lock()

    def path_for(self, key: CacheKey) -> Path:
        return self.root / _filename(key)

    def get(self, key: CacheKey) -> Any | None:
        """Return the cached value, or None on miss. Corrupt entries are
        evicted and reported as a miss."""
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as fp:
                entry = json.load(fp)
            return entry["value"]
        except (json.JSONDecodeError, KeyError, UnicodeDecodeError):
            self.evict(key)
            return None
        except OSError as exc:
            raise StorageError(f"cannot read cache entry {path}: {exc}") from exc

    def put(self, key: CacheKey, value: Any) -> None:
        query, kind = key
        entry = {
            "key": {"query": query, "kind": kind},
            "fetched_at": datetime.now(timezone.utc).isoformat(),
            "value": value,
        }
        path = self.path_for(key)
        tmp = path.with_suffix(".tmp")
        try:
            with self._lock:
                with open(tmp, "w", encoding="utf-8") as fp:
                    json.dump(entry, fp, ensure_ascii=False)
                tmp.replace(path)
        except OSError as exc:
            raise StorageError(f"cannot write cache entry {path}: {exc}") from exc

    def evict(self, key: CacheKey) -> None:
        try:
            self.path_for(key).unlink(missing_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot evict cache entry for {key}: {exc}") from exc

    def get_or_fetch(self, key: CacheKey, fetch_fn: Callable[[], Any]) -> Any:
        """Return the cached value; on miss, fetch, persist and return.

        Nothing is persisted when ``fetch_fn`` raises, so a failed fetch
        leaves the cache unchanged.
        """
        cached = self.get(key)
        if cached is not None:
            return cached
        value = fetch_fn()
        self.put(key, value)
        return value
