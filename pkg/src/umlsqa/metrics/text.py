"""Shared tokenization for the scoring metrics.

One documented tokenizer, fixed for comparability across systems:
lowercase, then split on any run of non-alphanumeric characters. No
stemming, no stopword removal.
"""

from __future__ import annotations

import re

TokenSequence = list[str]

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> TokenSequence:
    return _TOKEN.findall(text.lower())
