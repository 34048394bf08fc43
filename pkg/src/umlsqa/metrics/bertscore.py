"""BERTScore-style greedy token matching over embedding cosine similarity.

Precision is the mean over candidate tokens of each token's best cosine
match in the reference; recall is the symmetric column-wise quantity; F1
is their harmonic mean. No idf weighting and no baseline rescaling --
the score is exactly what the similarity matrix implies, which keeps it
self-contained and directly testable against the definition.
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import ProviderError
from ..providers import EmbeddingProvider
from .rouge import PRF, f1_score
from .text import TokenSequence

logger = logging.getLogger(__name__)


def cosine_similarity_matrix(cand_vectors: np.ndarray, ref_vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities, candidate rows x reference columns.

    Zero vectors are left unnormalized and therefore similarity 0.
    """

    def _normalize(m: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(m, axis=1, keepdims=True)
        return m / np.where(norms == 0.0, 1.0, norms)

    return _normalize(cand_vectors) @ _normalize(ref_vectors).T


def greedy_match_scores(similarity: np.ndarray) -> tuple[float, float]:
    """Greedy matching (P, R) for a candidate-by-reference similarity matrix."""
    sim = np.asarray(similarity, dtype=float)
    if sim.size == 0:
        return 0.0, 0.0
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    return precision, recall


def bertscore(
    candidate: TokenSequence, reference: TokenSequence, embedder: EmbeddingProvider
) -> PRF:
    """Greedy-matching P/R/F1 between two token sequences.

    Empty sequences score 0/0/0 with a warning; embedding dimension
    mismatches surface as provider errors.
    """
    if not candidate or not reference:
        logger.warning(
            "bertscore over an empty sequence (candidate=%d, reference=%d tokens); scoring 0",
            len(candidate),
            len(reference),
        )
        return PRF(0.0, 0.0, 0.0)
    cand_vectors = np.asarray(embedder.embed(candidate), dtype=float)
    ref_vectors = np.asarray(embedder.embed(reference), dtype=float)
    if cand_vectors.ndim != 2 or ref_vectors.ndim != 2:
        raise ProviderError("embedder must return one vector per token")
    if cand_vectors.shape[0] != len(candidate) or ref_vectors.shape[0] != len(reference):
        raise ProviderError(
            f"embedder returned {cand_vectors.shape[0]}/{ref_vectors.shape[0]} vectors "
            f"for {len(candidate)}/{len(reference)} tokens"
        )
    if cand_vectors.shape[1] != ref_vectors.shape[1]:
        raise ProviderError(
            f"embedding dimension mismatch across calls: "
            f"{cand_vectors.shape[1]} vs {ref_vectors.shape[1]}"
        )
    precision, recall = greedy_match_scores(cosine_similarity_matrix(cand_vectors, ref_vectors))
    return PRF(precision, recall, f1_score(precision, recall))
