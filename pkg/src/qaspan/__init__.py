"""Translate SQuAD 2.0 datasets into other languages and recover answer spans."""

__version__ = "0.1.0"

from .align import (AlignConfig, AlignmentCandidate, AlignmentResult, NoAlignment,
                    align_answer, best_candidate, enumerate_candidates, extend_answer,
                    locate_in_context, tokenize)
from .languages import LanguageSpec, convert_digits, default_registry
from .metrics import EvalReport, Prediction, bleu, evaluate, exact_match, f1, normalize_answer
from .pipeline import PipelineConfig, PipelineReport, translate_dataset
from .segmenter import SentenceSpan, find_answer_sentence, split_sentences
from .squad import (QA, Answer, Article, DatasetStats, Paragraph, SquadDataset, Violation,
                    parse_dataset, serialize_dataset, stats, validate)

__all__ = [
    "AlignConfig", "AlignmentCandidate", "AlignmentResult", "NoAlignment", "align_answer",
    "best_candidate", "enumerate_candidates", "extend_answer", "locate_in_context", "tokenize",
    "LanguageSpec", "convert_digits", "default_registry",
    "EvalReport", "Prediction", "bleu", "evaluate", "exact_match", "f1", "normalize_answer",
    "PipelineConfig", "PipelineReport", "translate_dataset",
    "SentenceSpan", "find_answer_sentence", "split_sentences",
    "QA", "Answer", "Article", "DatasetStats", "Paragraph", "SquadDataset", "Violation",
    "parse_dataset", "serialize_dataset", "stats", "validate",
]
