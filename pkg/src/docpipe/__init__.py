"""docpipe: pipeline engine and evaluation harness for complex question
answering over full-length documents."""

from .types import (
    AnswerSet,
    AnswerType,
    Corpus,
    Document,
    GoldAnnotation,
    Provenance,
    QId,
    QuestionSpec,
    Span,
    default_question_specs,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerSet",
    "AnswerType",
    "Corpus",
    "Document",
    "GoldAnnotation",
    "Provenance",
    "QId",
    "QuestionSpec",
    "Span",
    "default_question_specs",
    "__version__",
]
