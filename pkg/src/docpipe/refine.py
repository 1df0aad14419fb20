"""Span post-processing: positional merging, special-character trimming,
and the answer normalization used by dedup and the metrics."""

from __future__ import annotations

import re
import string
from dataclasses import dataclass

from .types import AnswerSet, Document, Provenance, QId, Span

_BRACKET_OPENERS = {")": "(", "]": "[", "}": "{"}


@dataclass(frozen=True)
class MergePolicy:
    """Controls positional span merging.

    enabled=False bypasses merging entirely (used for questions whose answers
    can be extremely concise). allow_adjacent_gap merges spans separated by at
    most that many characters. containment_merge=False keeps a span fully
    contained in another as its own output span instead of absorbing it, which
    gives up the pairwise non-overlap guarantee.
    """

    enabled: bool = True
    allow_adjacent_gap: int = 1
    containment_merge: bool = True

    def __post_init__(self) -> None:
        if self.allow_adjacent_gap < 0:
            raise ValueError("allow_adjacent_gap must be >= 0")


def merge_spans(spans: list[Span], doc: Document, policy: MergePolicy) -> list[Span]:
    """Merge overlapping, contained, and near-adjacent spans into document slices.

    Output spans carry the max member score and the exact document slice as
    text. Input order does not matter; output is sorted by position.
    """
    if not policy.enabled or len(spans) <= 1:
        return sorted(spans, key=lambda s: (s.start, s.end))
    for s in spans:
        if s.end > len(doc.text) or doc.text[s.start : s.end] != s.text:
            raise ValueError(f"span [{s.start}, {s.end}) does not slice document {doc.doc_id!r}")

    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    contained: list[Span] = []
    merged: list[list] = []  # [start, end, score, members]
    for s in ordered:
        if merged and s.start <= merged[-1][1] + policy.allow_adjacent_gap:
            if not policy.containment_merge and s.end <= merged[-1][1]:
                contained.append(s)
                continue
            merged[-1][1] = max(merged[-1][1], s.end)
            merged[-1][2] = max(merged[-1][2], s.score)
            merged[-1][3].append(s)
        else:
            merged.append([s.start, s.end, s.score, [s]])

    out = []
    for start, end, score, members in merged:
        sub_ids = {m.subquestion_id for m in members if m.subquestion_id}
        out.append(
            Span(
                text=doc.text[start:end],
                start=start,
                end=end,
                score=score,
                model_id=members[0].model_id,
                window_id=members[0].window_id if len(members) == 1 else None,
                subquestion_id=next(iter(sub_ids)) if len(sub_ids) == 1 else None,
            )
        )
    out.extend(contained)
    return sorted(out, key=lambda s: (s.start, s.end))


def _has_unmatched_opener(text: str, opener: str, closer: str) -> bool:
    return text.count(opener) > text.count(closer)


def _trim_once(s: str) -> str:
    i = 0
    while i < len(s) and not s[i].isalnum():
        i += 1
    s = s[i:]
    while s:
        c = s[-1]
        if c.isalnum():
            break
        opener = _BRACKET_OPENERS.get(c)
        if opener is not None and _has_unmatched_opener(s[:-1], opener, c):
            break
        s = s[:-1]
    return s


def trim_special(text: str) -> str:
    """Strip leading/trailing non-alphanumerics, keeping a trailing closing
    bracket whose opener survives inside. Interior characters are untouched."""
    s = text
    while True:
        t = _trim_once(s)
        if t == s:
            return s
        s = t


_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def squad_normalize(text: str) -> str:
    """Lowercase, drop punctuation, drop articles (a, an, the), collapse whitespace."""
    s = text.lower()
    s = s.translate(_PUNCT_TABLE)
    s = _ARTICLES.sub(" ", s)
    return " ".join(s.split())


def dedup_answers(answers: list[str]) -> list[str]:
    """Keep first occurrences; drop later entries equal under squad_normalize."""
    seen: set[str] = set()
    out: list[str] = []
    for a in answers:
        key = squad_normalize(a)
        if key in seen:
            continue
        seen.add(key)
        out.append(a)
    return out


def build_answer_set(
    doc: Document,
    qid: QId,
    spans: list[Span],
    policy: MergePolicy,
    nullable: bool,
) -> AnswerSet:
    """Full refinement of retained spans into an AnswerSet: positional merge,
    special-character trim, normalization dedup (duplicates fold their
    provenance and best score into the kept answer)."""
    merged = sorted(merge_spans(spans, doc, policy), key=Span.sort_key)
    answers: list[str] = []
    scores: list[float] = []
    provenance: list[list[Span]] = []
    index: dict[str, int] = {}
    for span in merged:
        text = trim_special(span.text)
        if not text:
            continue
        key = squad_normalize(text)
        if key in index:
            i = index[key]
            provenance[i].append(span)
            scores[i] = max(scores[i], span.score)
        else:
            index[key] = len(answers)
            answers.append(text)
            scores.append(span.score)
            provenance.append([span])
    return AnswerSet(
        doc_id=doc.doc_id,
        qid=qid,
        answers=tuple(answers),
        scores=tuple(scores),
        provenance=tuple(Provenance(spans=tuple(p)) for p in provenance),
        empty_means_unanswerable=nullable and not answers,
    )
