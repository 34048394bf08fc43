"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes (see `umlsqa.cli`):
validation problems, provider/transport problems and local storage
problems must stay distinguishable all the way up.
"""

from __future__ import annotations


class UmlsQaError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(UmlsQaError):
    """Bad input: malformed files, violated preconditions, unknown ids."""


class NotFoundError(ValidationError):
    """A referenced entity (question, pair, fixture) does not exist."""


class ExtractionParseError(UmlsQaError):
    """LLM output could not be parsed into a term list.

    Carries the raw model output for logging and diagnosis.
    """

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ProviderError(UmlsQaError):
    """A remote provider (chat, UMLS, embedding) failed after retries."""


class CredentialError(ProviderError):
    """Authentication with a provider was rejected."""


class StorageError(UmlsQaError):
    """Local cache or store I/O failed (distinct from provider errors)."""
