"""Core domain types shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class QId(str, Enum):
    Q1 = "Q1"
    Q2 = "Q2"
    Q3 = "Q3"
    Q4 = "Q4"


class AnswerType(str, Enum):
    ENTITY = "entity"
    PHRASE = "phrase"


STAGE_NAMES = ("extract", "refine", "rag", "multihop", "ensemble")

DEFAULT_QUESTION_TEXTS: dict[QId, str] = {
    QId.Q1: "What machine learning or natural language processing techniques were used?",
    QId.Q2: "What software was used to perform machine learning or natural language processing techniques?",
    QId.Q3: "What was the research question that machine learning or natural language processing techniques were used to answer?",
    QId.Q4: "What were machine learning or natural language processing techniques used for?",
}


@dataclass(frozen=True)
class Document:
    """One full-text document. All offsets elsewhere are character offsets into `text`."""

    doc_id: str
    text: str
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be nonempty")
        if not self.text:
            raise ValueError(f"document {self.doc_id!r}: text must be nonempty")

    def as_dict(self) -> dict[str, Any]:
        return {"doc_id": self.doc_id, "text": self.text, "meta": dict(self.meta)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Document":
        return cls(doc_id=d["doc_id"], text=d["text"], meta=dict(d.get("meta", {})))


@dataclass(frozen=True)
class QuestionSpec:
    """One predetermined question plus its stage graph and retention parameters."""

    qid: QId
    text: str
    answer_type: AnswerType
    nullable: bool
    topk: int
    merge_enabled: bool
    stages: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.topk < 1:
            raise ValueError(f"{self.qid.value}: topk must be >= 1, got {self.topk}")
        unknown = [s for s in self.stages if s not in STAGE_NAMES]
        if unknown:
            raise ValueError(f"{self.qid.value}: unknown stages {unknown}")
        if self.qid is QId.Q4 and "multihop" not in self.stages:
            raise ValueError("Q4 stage list must contain 'multihop'")

    def as_dict(self) -> dict[str, Any]:
        return {
            "qid": self.qid.value,
            "text": self.text,
            "answer_type": self.answer_type.value,
            "nullable": self.nullable,
            "topk": self.topk,
            "merge_enabled": self.merge_enabled,
            "stages": list(self.stages),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "QuestionSpec":
        return cls(
            qid=QId(d["qid"]),
            text=d["text"],
            answer_type=AnswerType(d["answer_type"]),
            nullable=bool(d["nullable"]),
            topk=int(d["topk"]),
            merge_enabled=bool(d["merge_enabled"]),
            stages=tuple(d["stages"]),
        )


def default_question_specs() -> dict[QId, QuestionSpec]:
    """The four stock questions with their default stage graphs and retention depths."""
    return {
        QId.Q1: QuestionSpec(
            qid=QId.Q1,
            text=DEFAULT_QUESTION_TEXTS[QId.Q1],
            answer_type=AnswerType.ENTITY,
            nullable=False,
            topk=20,
            merge_enabled=True,
            stages=("extract", "refine", "rag", "ensemble"),
        ),
        QId.Q2: QuestionSpec(
            qid=QId.Q2,
            text=DEFAULT_QUESTION_TEXTS[QId.Q2],
            answer_type=AnswerType.ENTITY,
            nullable=True,
            topk=5,
            merge_enabled=False,
            stages=("extract", "refine", "rag", "ensemble"),
        ),
        QId.Q3: QuestionSpec(
            qid=QId.Q3,
            text=DEFAULT_QUESTION_TEXTS[QId.Q3],
            answer_type=AnswerType.PHRASE,
            nullable=False,
            topk=5,
            merge_enabled=True,
            stages=("extract", "refine", "ensemble"),
        ),
        QId.Q4: QuestionSpec(
            qid=QId.Q4,
            text=DEFAULT_QUESTION_TEXTS[QId.Q4],
            answer_type=AnswerType.PHRASE,
            nullable=False,
            topk=10,
            merge_enabled=True,
            stages=("extract", "multihop", "refine"),
        ),
    }


@dataclass(frozen=True)
class Span:
    """One retained prediction, anchored to document character offsets."""

    text: str
    start: int
    end: int
    score: float
    model_id: str
    window_id: int | None = None
    subquestion_id: str | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span range [{self.start}, {self.end})")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"span score {self.score} outside [0, 1]")

    def sort_key(self) -> tuple[float, int, int]:
        # Score descending, ties by position ascending.
        return (-self.score, self.start, self.end)

    def as_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "start": self.start,
            "end": self.end,
            "score": self.score,
            "model_id": self.model_id,
            "window_id": self.window_id,
            "subquestion_id": self.subquestion_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Span":
        return cls(
            text=d["text"],
            start=int(d["start"]),
            end=int(d["end"]),
            score=float(d["score"]),
            model_id=d["model_id"],
            window_id=d.get("window_id"),
            subquestion_id=d.get("subquestion_id"),
        )


@dataclass(frozen=True)
class Provenance:
    """Where one answer came from: contributing spans and/or a generation id."""

    spans: tuple[Span, ...] = ()
    generation_id: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "spans": [s.as_dict() for s in self.spans],
            "generation_id": self.generation_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Provenance":
        return cls(
            spans=tuple(Span.from_dict(s) for s in d.get("spans", [])),
            generation_id=d.get("generation_id"),
        )


@dataclass(frozen=True)
class AnswerSet:
    """Ordered answer strings for one document x question, with provenance.

    `scores` is the best contributing score per answer (0.0 when unknown).
    An empty `answers` list with `empty_means_unanswerable` set is a valid
    "no answer" result for nullable questions; without the flag it records a
    forced-empty outcome for a question that assumes answers exist.
    """

    doc_id: str
    qid: QId
    answers: tuple[str, ...]
    scores: tuple[float, ...] = ()
    provenance: tuple[Provenance, ...] = ()
    empty_means_unanswerable: bool = False

    def __post_init__(self) -> None:
        if self.scores and len(self.scores) != len(self.answers):
            raise ValueError("scores must parallel answers")
        if self.provenance and len(self.provenance) != len(self.answers):
            raise ValueError("provenance must parallel answers")

    @property
    def is_empty(self) -> bool:
        return not self.answers

    def score_of(self, i: int) -> float:
        return self.scores[i] if self.scores else 0.0

    def provenance_of(self, i: int) -> Provenance:
        return self.provenance[i] if self.provenance else Provenance()

    def as_dict(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "qid": self.qid.value,
            "answers": list(self.answers),
            "scores": list(self.scores),
            "provenance": [p.as_dict() for p in self.provenance],
            "empty_means_unanswerable": self.empty_means_unanswerable,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AnswerSet":
        return cls(
            doc_id=d["doc_id"],
            qid=QId(d["qid"]),
            answers=tuple(d["answers"]),
            scores=tuple(float(s) for s in d.get("scores", [])),
            provenance=tuple(Provenance.from_dict(p) for p in d.get("provenance", [])),
            empty_means_unanswerable=bool(d.get("empty_means_unanswerable", False)),
        )


@dataclass(frozen=True)
class GoldAnnotation:
    """Reference answers for one document x question. Empty only for nullable questions."""

    doc_id: str
    qid: QId
    gold_answers: tuple[str, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "qid": self.qid.value,
            "gold_answers": list(self.gold_answers),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GoldAnnotation":
        return cls(doc_id=d["doc_id"], qid=QId(d["qid"]), gold_answers=tuple(d["gold_answers"]))


@dataclass(frozen=True)
class Corpus:
    """Immutable bundle of documents, gold annotations, and question specs."""

    documents: tuple[Document, ...]
    gold: dict[tuple[str, QId], GoldAnnotation]
    question_specs: dict[QId, QuestionSpec]

    def document(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)

    @property
    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]
