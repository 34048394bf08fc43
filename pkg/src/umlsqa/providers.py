"""Chat-completion and token-embedding provider abstractions.

The chat schema is deliberately minimal: a list of ``{"role", "content"}``
messages goes in, one assistant text comes out. The HTTP implementation
speaks the common ``POST {base_url}/chat/completions`` shape with a
bearer token taken from an environment variable, so any compatible
endpoint can back it.

The embedding endpoint contract is equally small: ``POST {base_url}``
with ``{"tokens": [...]}`` returns ``{"dimension": d, "vectors": [[...]]}``.
Scripted/stub implementations live here too because both the pipeline
config and the test suite construct them.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from typing import Protocol, runtime_checkable

import numpy as np
import requests

from .errors import CredentialError, ProviderError

logger = logging.getLogger(__name__)

Message = dict[str, str]


@runtime_checkable
class ChatProvider(Protocol):
    """Anything that can complete a chat exchange with one text reply."""

    concurrency_safe: bool

    def complete(
        self,
        messages: list[Message],
        *,
        temperature: float = 0.0,
        max_output_tokens: int | None = None,
        seed: int | None = None,
    ) -> str: ...

    def describe(self) -> str: ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Maps a token list to one fixed-dimension vector per token."""

    concurrency_safe: bool

    def embed(self, tokens: list[str]) -> np.ndarray: ...

    def describe(self) -> str: ...


class HttpChatProvider:
    """Chat provider backed by an HTTP chat-completions endpoint."""

    concurrency_safe = True

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "CHAT_API_KEY",
        timeout: float = 60.0,
        transport_retries: int = 2,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.transport_retries = transport_retries
        self._session = requests.Session()

    def describe(self) -> str:
        return f"chat:http:{self.base_url}:{self.model}"

    def complete(self, messages, *, temperature=0.0, max_output_tokens=None, seed=None) -> str:
        api_key = os.environ.get(self.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body: dict = {"model": self.model, "messages": messages, "temperature": temperature}
        if max_output_tokens is not None:
            body["max_tokens"] = max_output_tokens
        if seed is not None:
            body["seed"] = seed

        last_exc: Exception | None = None
        for attempt in range(1 + self.transport_retries):
            try:
                resp = self._session.post(
                    f"{self.base_url}/chat/completions",
                    headers=headers,
                    json=body,
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last_exc = exc
                if attempt < self.transport_retries:
                    time.sleep(min(2.0, 0.25 * 2**attempt))
                continue
            if resp.status_code in (401, 403):
                raise CredentialError(
                    f"chat endpoint rejected credentials from ${self.api_key_env} "
                    f"(HTTP {resp.status_code})"
                )
            if resp.status_code == 429 or resp.status_code >= 500:
                last_exc = ProviderError(f"chat endpoint returned HTTP {resp.status_code}")
                if attempt < self.transport_retries:
                    time.sleep(_retry_after(resp, attempt))
                continue
            if resp.status_code != 200:
                raise ProviderError(f"chat endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                data = resp.json()
                return data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"chat endpoint returned an unexpected payload: {exc}") from exc
        raise ProviderError(f"chat endpoint unreachable after retries: {last_exc}")


class QueueChatProvider:
    """Scripted provider that replays a fixed sequence of replies.

    Useful when a test needs different replies across retries. Counts
    calls; safe under concurrent use.
    """

    concurrency_safe = True

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self._lock = threading.Lock()
        self.calls = 0

    def describe(self) -> str:
        return "chat:queue"

    def complete(self, messages, *, temperature=0.0, max_output_tokens=None, seed=None) -> str:
        with self._lock:
            self.calls += 1
            if not self._responses:
                raise ProviderError("scripted queue exhausted")
            return self._responses.pop(0)


class RuleChatProvider:
    """Scripted provider that matches substring rules against the last
    user message; first matching rule wins, else the default reply.
    A rule's "contains" may be a string or a list of strings that must
    all be present.

    This is the deterministic stand-in the pipeline config can declare
    (`kind: scripted`), keeping full runs reproducible without any
    network access.
    """

    concurrency_safe = True

    def __init__(self, rules: list[dict] | None = None, default: str | None = None):
        self.rules = rules or []
        self.default = default
        self._lock = threading.Lock()
        self.calls = 0

    @classmethod
    def from_file(cls, path) -> "RuleChatProvider":
        with open(path, "r", encoding="utf-8") as fp:
            spec = json.load(fp)
        return cls(rules=spec.get("rules", []), default=spec.get("default"))

    def describe(self) -> str:
        return "chat:scripted"

    def complete(self, messages, *, temperature=0.0, max_output_tokens=None, seed=None) -> str:
        with self._lock:
            self.calls += 1
        prompt = ""
        for msg in reversed(messages):
            if msg.get("role") == "user":
                prompt = msg.get("content", "")
                break
        for rule in self.rules:
            needles = rule.get("contains", "")
            if isinstance(needles, str):
                needles = [needles]
            if all(needle in prompt for needle in needles):
                return rule["response"]
        if self.default is not None:
            return self.default
        raise ProviderError("no scripted rule matched and no default reply configured")


class HttpEmbeddingProvider:
    """Embedding provider backed by a token-embedding HTTP endpoint."""

    concurrency_safe = True

    def __init__(self, base_url: str, api_key_env: str = "EMBEDDING_API_KEY", timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._session = requests.Session()

    def describe(self) -> str:
        return f"embedding:http:{self.base_url}"

    def embed(self, tokens: list[str]) -> np.ndarray:
        api_key = os.environ.get(self.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            resp = self._session.post(
                self.base_url, headers=headers, json={"tokens": tokens}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ProviderError(f"embedding endpoint unreachable: {exc}") from exc
        if resp.status_code in (401, 403):
            raise CredentialError(f"embedding endpoint rejected credentials (HTTP {resp.status_code})")
        if resp.status_code != 200:
            raise ProviderError(f"embedding endpoint returned HTTP {resp.status_code}")
        data = resp.json()
        vectors = np.asarray(data.get("vectors", []), dtype=float)
        dim = data.get("dimension")
        if vectors.ndim != 2 or vectors.shape[0] != len(tokens) or vectors.shape[1] != dim:
            raise ProviderError(
                f"embedding endpoint shape mismatch: declared dimension {dim}, "
                f"got array of shape {vectors.shape} for {len(tokens)} tokens"
            )
        return vectors


class OrthogonalStubEmbedder:
    """Deterministic test embedder: distinct token -> distinct one-hot vector.

    Cosine similarity collapses to exact token equality, which reduces
    greedy matching to unigram membership overlap -- a property the test
    suite exploits as an oracle.
    """

    concurrency_safe = True

    def __init__(self, dimension: int = 512):
        self.dimension = dimension
        self._index: dict[str, int] = {}
        self._lock = threading.Lock()

    def describe(self) -> str:
        return f"embedding:orthogonal-stub:{self.dimension}"

    def embed(self, tokens: list[str]) -> np.ndarray:
        out = np.zeros((len(tokens), self.dimension), dtype=float)
        with self._lock:
            for row, tok in enumerate(tokens):
                if tok not in self._index:
                    if len(self._index) >= self.dimension:
                        raise ProviderError(
                            f"orthogonal stub vocabulary exceeded dimension {self.dimension}"
                        )
                    self._index[tok] = len(self._index)
                out[row, self._index[tok]] = 1.0
        return out


def _retry_after(resp: requests.Response, attempt: int) -> float:
    header = resp.headers.get("Retry-After")
    if header:
        try:
            return min(30.0, float(header))
        except ValueError:
            pass
    return min(2.0, 0.25 * 2**attempt)
