"""Answer ensembling: union the answer sets of complementary model pipelines."""

from __future__ import annotations

from dataclasses import dataclass

from .refine import squad_normalize
from .types import AnswerSet, Provenance, QId

DEFAULT_ENSEMBLE_MEMBERS: dict[QId, tuple[str, ...]] = {
    QId.Q1: ("deberta", "albert"),
    QId.Q2: ("electra", "roberta"),
    QId.Q3: ("deberta", "albert"),
}


@dataclass(frozen=True)
class EnsembleSpec:
    qid: QId
    member_model_ids: tuple[str, ...]
    label: str = "Combined"

    def __post_init__(self) -> None:
        if len(self.member_model_ids) < 2:
            raise ValueError("an ensemble needs at least two members")
        if len(set(self.member_model_ids)) != len(self.member_model_ids):
            raise ValueError("ensemble members must be distinct")


def combine(sets: list[AnswerSet]) -> AnswerSet:
    """Union of member answers, deduplicated under normalization.

    Order: best contributing score descending, ties by member order then
    lexicographic. Provenance of duplicates is merged. The union is
    unanswerable only when every member said unanswerable.
    """
    if not sets:
        raise ValueError("combine requires at least one answer set")
    doc_ids = {s.doc_id for s in sets}
    qids = {s.qid for s in sets}
    if len(doc_ids) != 1 or len(qids) != 1:
        raise ValueError(f"cannot combine mismatched sets: doc_ids={sorted(doc_ids)}, qids={sorted(q.value for q in qids)}")

    entries: dict[str, dict] = {}
    for member_idx, answer_set in enumerate(sets):
        for i, answer in enumerate(answer_set.answers):
            key = squad_normalize(answer)
            score = answer_set.score_of(i)
            prov = answer_set.provenance_of(i)
            entry = entries.get(key)
            if entry is None:
                entries[key] = {
                    "answer": answer,
                    "score": score,
                    "member": member_idx,
                    "spans": list(prov.spans),
                    "generation_ids": [prov.generation_id] if prov.generation_id else [],
                }
            else:
                entry["score"] = max(entry["score"], score)
                entry["member"] = min(entry["member"], member_idx)
                entry["spans"].extend(prov.spans)
                if prov.generation_id and prov.generation_id not in entry["generation_ids"]:
                    entry["generation_ids"].append(prov.generation_id)

    ordered = sorted(entries.values(), key=lambda e: (-e["score"], e["member"], e["answer"]))
    return AnswerSet(
        doc_id=next(iter(doc_ids)),
        qid=next(iter(qids)),
        answers=tuple(e["answer"] for e in ordered),
        scores=tuple(e["score"] for e in ordered),
        provenance=tuple(
            Provenance(
                spans=tuple(e["spans"]),
                generation_id=e["generation_ids"][0] if e["generation_ids"] else None,
            )
            for e in ordered
        ),
        empty_means_unanswerable=bool(ordered == [] and all(s.empty_means_unanswerable for s in sets)),
    )
