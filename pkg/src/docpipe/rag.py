"""Second-stage generation over extracted evidence: build an entity prompt
from raw spans, ask a generative backend for a clean list, parse it."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .errors import StageError
from .protocol.client import BackendClient
from .refine import dedup_answers, squad_normalize, trim_special
from .types import AnswerSet, Document, Provenance, QId, QuestionSpec, Span

DEFAULT_TEMPLATES = {
    "techniques": (
        "You are given evidence snippets extracted from a research paper.\n"
        "List each distinct machine learning or natural language processing "
        "technique mentioned in the evidence, one per line.\n"
        "Evidence:\n{evidence}"
    ),
    "software": (
        "You are given evidence snippets extracted from a research paper.\n"
        "List each distinct software tool used for machine learning or natural "
        "language processing mentioned in the evidence, one per line. "
        "Answer 'none' if no software is mentioned.\n"
        "Evidence:\n{evidence}"
    ),
}

KIND_BY_QID = {QId.Q1: "techniques", QId.Q2: "software"}

GENERATION_MAX_NEW = 256
GENERATION_TEMPERATURE = 0.0

NONE_MARKERS = {"none", "no answer", "na", "no software"}

_LIST_MARKER = re.compile(r"^\s*(?:[-*•]+|\(?\d+[.)])\s*")


@dataclass(frozen=True)
class RagPrompt:
    question_kind: str
    instruction: str
    evidence: tuple[str, ...]
    rendered: str


def build_entity_prompt(
    kind: str,
    raw_answers: list[str],
    template: str | None = None,
) -> RagPrompt:
    """Deterministic prompt rendering; every evidence string appears verbatim."""
    if not raw_answers:
        raise StageError("cannot build an entity prompt from zero raw answers")
    if kind not in DEFAULT_TEMPLATES:
        raise StageError(f"unknown entity kind {kind!r}")
    instruction = template if template is not None else DEFAULT_TEMPLATES[kind]
    evidence_block = "\n".join(f"{i}. {text}" for i, text in enumerate(raw_answers, start=1))
    return RagPrompt(
        question_kind=kind,
        instruction=instruction,
        evidence=tuple(raw_answers),
        rendered=instruction.format(evidence=evidence_block),
    )


def _is_none_marker(line: str) -> bool:
    return squad_normalize(line) in NONE_MARKERS


def parse_entity_list(generation: str, nullable: bool) -> list[str]:
    """Parse a line-oriented, numbered, or bulleted entity list. Returns []
    only for an explicit none-marker on a nullable question."""
    lines = [ln for ln in (raw.strip() for raw in generation.splitlines()) if ln]
    if len(lines) == 1 and _is_none_marker(lines[0]):
        if nullable:
            return []
        raise StageError("empty categorized answer for a non-nullable question")
    items: list[str] = []
    for line in lines:
        if _is_none_marker(line):
            continue
        item = trim_special(_LIST_MARKER.sub("", line))
        if item:
            items.append(item)
    items = dedup_answers(items)
    if not items:
        raise StageError("empty categorized answer")
    return items


def _generation_id(prompt: str, model_id: str) -> str:
    return "gen-" + hashlib.sha256(f"{model_id}:{prompt}".encode("utf-8")).hexdigest()[:12]


def rag_enhance(
    doc: Document,
    q: QuestionSpec,
    raw: list[Span],
    gen_client: BackendClient,
    template: str | None = None,
    max_new: int = GENERATION_MAX_NEW,
) -> AnswerSet:
    """Standardize raw extracted spans into a categorized answer list.

    Answers keep generation order. Provenance links each answer to raw spans
    it matches by case-insensitive containment (either direction, so
    canonicalized names still link to their source surface), or to the
    generation as a whole otherwise.
    """
    if q.qid not in KIND_BY_QID:
        raise StageError(f"{q.qid.value} has no generation stage")
    if not raw:
        return AnswerSet(
            doc_id=doc.doc_id,
            qid=q.qid,
            answers=(),
            empty_means_unanswerable=q.nullable,
        )
    kind = KIND_BY_QID[q.qid]
    prompt = build_entity_prompt(kind, [s.text for s in raw], template=template)
    generation = gen_client.generate(
        prompt.rendered, max_new=max_new, temperature=GENERATION_TEMPERATURE
    )
    answers = parse_entity_list(generation, nullable=q.nullable)
    gen_id = _generation_id(prompt.rendered, gen_client.descriptor.model_id)
    if not answers:
        return AnswerSet(
            doc_id=doc.doc_id,
            qid=q.qid,
            answers=(),
            empty_means_unanswerable=True,
        )

    scores: list[float] = []
    provenance: list[Provenance] = []
    for answer in answers:
        lowered = answer.lower()
        matched = tuple(
            s for s in raw if lowered in s.text.lower() or s.text.lower() in lowered
        )
        if matched:
            scores.append(max(s.score for s in matched))
            provenance.append(Provenance(spans=matched, generation_id=gen_id))
        else:
            scores.append(0.0)
            provenance.append(Provenance(generation_id=gen_id))
    return AnswerSet(
        doc_id=doc.doc_id,
        qid=q.qid,
        answers=tuple(answers),
        scores=tuple(scores),
        provenance=tuple(provenance),
        empty_means_unanswerable=False,
    )
