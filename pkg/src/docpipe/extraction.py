"""Long-document handling: window the text, query an extractive backend per
window, map spans back to document coordinates, keep the global top-k."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import StageError
from .protocol.client import BackendClient
from .types import Document, QuestionSpec, Span

DEFAULT_WINDOW_CHARS = 2000
DEFAULT_STRIDE_CHARS = 1500


@dataclass(frozen=True)
class Window:
    window_id: int
    start: int
    end: int
    text: str


def _snap_back(text: str, pos: int, max_shift: int) -> int:
    """Move a boundary left to the nearest whitespace edge so no window starts
    mid-word. Shift is capped so coverage of the nominal grid cannot break."""
    if pos <= 0 or pos >= len(text):
        return pos
    if text[pos].isspace() or text[pos - 1].isspace():
        return pos
    p = pos
    while p > 0 and pos - p < max_shift and not text[p - 1].isspace():
        p -= 1
    if p == 0 or text[p - 1].isspace():
        return p
    return pos  # token longer than the overlap; keep the nominal boundary


def window_document(
    doc: Document,
    window_chars: int = DEFAULT_WINDOW_CHARS,
    stride_chars: int = DEFAULT_STRIDE_CHARS,
) -> list[Window]:
    """Cover the document with overlapping windows (overlap = window - stride)."""
    if not (0 < stride_chars <= window_chars):
        raise ValueError(f"need 0 < stride ({stride_chars}) <= window ({window_chars})")
    text = doc.text
    if len(text) <= window_chars:
        return [Window(window_id=0, start=0, end=len(text), text=text)]

    overlap = window_chars - stride_chars
    windows: list[Window] = []
    nominal = 0
    wid = 0
    while True:
        start = _snap_back(text, nominal, overlap)
        if windows:
            start = max(start, windows[-1].start + 1)
        end = min(start + window_chars, len(text))
        windows.append(Window(window_id=wid, start=start, end=end, text=text[start:end]))
        if end == len(text):
            break
        nominal += stride_chars
        wid += 1
    return windows


@dataclass(frozen=True)
class ExtractionOutcome:
    """Top spans for one (document, question, backend) plus the forced-empty
    marker for non-nullable questions that found nothing."""

    spans: tuple[Span, ...]
    forced_empty: bool = False

    def as_dict(self) -> dict:
        return {"spans": [s.as_dict() for s in self.spans], "forced_empty": self.forced_empty}

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionOutcome":
        return cls(
            spans=tuple(Span.from_dict(s) for s in d["spans"]),
            forced_empty=bool(d.get("forced_empty", False)),
        )


def extract_for_question(
    doc: Document,
    question_text: str,
    client: BackendClient,
    top_k: int,
    nullable: bool,
    window_chars: int = DEFAULT_WINDOW_CHARS,
    stride_chars: int = DEFAULT_STRIDE_CHARS,
    subquestion_id: str | None = None,
) -> ExtractionOutcome:
    windows = window_document(doc, window_chars, stride_chars)
    best: dict[tuple[int, int], Span] = {}
    for window in windows:
        try:
            result = client.extract_spans(question_text, window.text, top_k)
        except Exception as exc:
            raise StageError(
                f"extraction failed on doc {doc.doc_id!r} window {window.window_id}: {exc}"
            ) from exc
        for a in result.answers:
            start, end = a.start + window.start, a.end + window.start
            if doc.text[start:end] != a.text:
                raise StageError(
                    f"doc {doc.doc_id!r} window {window.window_id}: offset mapping broke "
                    f"for span {a.text!r}"
                )
            span = Span(
                text=a.text,
                start=start,
                end=end,
                score=a.score,
                model_id=client.descriptor.model_id,
                window_id=window.window_id,
                subquestion_id=subquestion_id,
            )
            key = (start, end)
            if key not in best or span.score > best[key].score:
                best[key] = span
    ordered = sorted(best.values(), key=Span.sort_key)[:top_k]
    return ExtractionOutcome(
        spans=tuple(ordered),
        forced_empty=not ordered and not nullable,
    )


def answer_question(
    doc: Document,
    q: QuestionSpec,
    client: BackendClient,
    top_k: int | None = None,
    window_chars: int = DEFAULT_WINDOW_CHARS,
    stride_chars: int = DEFAULT_STRIDE_CHARS,
) -> ExtractionOutcome:
    """Windowed extraction for one question spec; spans come back in document
    coordinates, deduplicated by position, score-descending, at most top_k."""
    return extract_for_question(
        doc,
        q.text,
        client,
        top_k if top_k is not None else q.topk,
        q.nullable,
        window_chars=window_chars,
        stride_chars=stride_chars,
    )
