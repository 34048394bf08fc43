"""UMLS-augmented medical question answering and its evaluation apparatus.

The package covers the full loop: terminology extraction from a
question, UMLS concept linking with definitions and capped relations,
knowledge-augmented answer generation, ROUGE/BERTScore automatic
scoring, and a blind four-dimension pairwise review service with
win-rate reporting.
"""

from .dataset import Corpus, QARecord, load_corpus, save_corpus, select_subset
from .extraction import (
    ExtractedTerm,
    ExtractionMode,
    build_extraction_prompt,
    extract_terms,
    parse_extraction_output,
)
from .pipeline import (
    AugmentedAnswer,
    Augmentation,
    GenerationParams,
    Providers,
    SystemConfig,
    answer_question,
    build_augmented_prompt,
    load_answer_set,
    run_experiment,
)
from .umls import ConceptRecord, Definition, Relation, UmlsClient

__version__ = "0.1.0"

__all__ = [
    "AugmentedAnswer",
    "Augmentation",
    "ConceptRecord",
    "Corpus",
    "Definition",
    "ExtractedTerm",
    "ExtractionMode",
    "GenerationParams",
    "Providers",
    "QARecord",
    "Relation",
    "SystemConfig",
    "UmlsClient",
    "answer_question",
    "build_augmented_prompt",
    "build_extraction_prompt",
    "extract_terms",
    "load_answer_set",
    "load_corpus",
    "parse_extraction_output",
    "run_experiment",
    "save_corpus",
    "select_subset",
    "__version__",
]
