"""Multi-hop decomposition: one single-hop sub-question per bridge entity,
extraction per sub-question, union of the per-sub top answers."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import StageError
from .extraction import ExtractionOutcome, extract_for_question
from .protocol.client import BackendClient
from .refine import MergePolicy, build_answer_set
from .types import AnswerSet, Document, QId, QuestionSpec, Span

DEFAULT_SUBQUESTION_TEMPLATE = "What was {entity} used for?"
DEFAULT_BASELINE_TOPK = 10


@dataclass(frozen=True)
class SubQuestion:
    parent_qid: QId
    bridge_entity: str
    text: str
    subquestion_id: str


def _subquestion_id(entity: str) -> str:
    return "sub-" + hashlib.sha256(entity.encode("utf-8")).hexdigest()[:12]


def make_subquestions(template: str, bridges: list[str]) -> list[SubQuestion]:
    """Instantiate the template once per distinct bridge entity, input order."""
    if "{entity}" not in template:
        raise StageError(f"sub-question template must contain '{{entity}}': {template!r}")
    seen: set[str] = set()
    out: list[SubQuestion] = []
    for bridge in bridges:
        if bridge in seen:
            continue
        seen.add(bridge)
        out.append(
            SubQuestion(
                parent_qid=QId.Q4,
                bridge_entity=bridge,
                text=template.format(entity=bridge),
                subquestion_id=_subquestion_id(bridge),
            )
        )
    return out


def answer_multihop(
    doc: Document,
    bridges: list[str],
    client: BackendClient,
    topk_per_sub: int,
    q4: QuestionSpec,
    policy: MergePolicy,
    template: str = DEFAULT_SUBQUESTION_TEMPLATE,
    bridge_cap: int | None = None,
    window_chars: int | None = None,
    stride_chars: int | None = None,
) -> tuple[AnswerSet, list[Span]]:
    """Run one extraction per sub-question and merge the union.

    Returns the refined AnswerSet plus the pre-merge span concatenation
    (bounded by |bridges| * topk_per_sub). With no bridges, falls back to the
    single-hop baseline.
    """
    if topk_per_sub < 1:
        raise StageError(f"topk_per_sub must be >= 1, got {topk_per_sub}")
    if bridge_cap is not None:
        bridges = bridges[:bridge_cap]
    subquestions = make_subquestions(template, bridges)
    if not subquestions:
        baseline = single_hop_baseline(
            doc, q4, client, policy, window_chars=window_chars, stride_chars=stride_chars
        )
        return baseline, []

    kwargs = {}
    if window_chars is not None:
        kwargs["window_chars"] = window_chars
    if stride_chars is not None:
        kwargs["stride_chars"] = stride_chars

    pre_merge: list[Span] = []
    for sub in subquestions:
        try:
            outcome = extract_for_question(
                doc,
                sub.text,
                client,
                topk_per_sub,
                nullable=True,
                subquestion_id=sub.subquestion_id,
                **kwargs,
            )
        except StageError as exc:
            raise StageError(f"sub-question {sub.subquestion_id} ({sub.text!r}): {exc}") from exc
        pre_merge.extend(outcome.spans)

    answer_set = build_answer_set(doc, QId.Q4, pre_merge, policy, nullable=q4.nullable)
    return answer_set, pre_merge


def single_hop_baseline(
    doc: Document,
    q4: QuestionSpec,
    client: BackendClient,
    policy: MergePolicy,
    baseline_topk: int = DEFAULT_BASELINE_TOPK,
    window_chars: int | None = None,
    stride_chars: int | None = None,
) -> AnswerSet:
    """Treat the multi-hop question as a conventional single-hop one."""
    kwargs = {}
    if window_chars is not None:
        kwargs["window_chars"] = window_chars
    if stride_chars is not None:
        kwargs["stride_chars"] = stride_chars
    outcome: ExtractionOutcome = extract_for_question(
        doc, q4.text, client, baseline_topk, q4.nullable, **kwargs
    )
    return build_answer_set(doc, QId.Q4, list(outcome.spans), policy, nullable=q4.nullable)
