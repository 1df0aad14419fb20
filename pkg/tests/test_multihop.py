import random

import pytest

from docpipe.errors import StageError
from docpipe.multihop import (
    DEFAULT_SUBQUESTION_TEMPLATE,
    answer_multihop,
    make_subquestions,
    single_hop_baseline,
)
from docpipe.protocol import BackendClient, BackendDescriptor, Capability
from docpipe.refine import MergePolicy
from docpipe.types import Document, QId, QuestionSpec


def test_make_subquestions_template_instantiation():
    subs = make_subquestions("What was {entity} used for?", ["LDA", "SVM"])
    assert [s.text for s in subs] == ["What was LDA used for?", "What was SVM used for?"]
    assert all(s.bridge_entity in s.text for s in subs)
    assert len({s.subquestion_id for s in subs}) == 2


def test_make_subquestions_empty_and_duplicates():
    assert make_subquestions(DEFAULT_SUBQUESTION_TEMPLATE, []) == []
    subs = make_subquestions(DEFAULT_SUBQUESTION_TEMPLATE, ["LDA", "LDA", "SVM"])
    assert [s.bridge_entity for s in subs] == ["LDA", "SVM"]


def test_make_subquestions_requires_placeholder():
    with pytest.raises(StageError):
        make_subquestions("no placeholder", ["LDA"])


def test_subquestion_count_random_bridges():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(0, 12)
        bridges = [f"entity{i}" for i in range(n)]
        assert len(make_subquestions(DEFAULT_SUBQUESTION_TEMPLATE, bridges)) == n


TABLE = {
    "entries": [
        {
            "selector": "LDA used for",
            "keywords": [{"surface": "to identify topics", "score": 0.9}],
        },
        {
            "selector": "SVM used for",
            "keywords": [
                {"surface": "to classify posts", "score": 0.85},
                {"surface": "to rank features", "score": 0.6},
            ],
        },
        {
            "selector": "techniques used for",
            "keywords": [{"surface": "to identify topics", "score": 0.5}],
        },
    ]
}

TEXT = (
    "Methods overview. We relied on LDA to identify topics across posts. "
    "The SVM helped to classify posts and to rank features for the study. "
    "Additional filler sentences describe survey design and coding practice. " * 3
)

Q4 = QuestionSpec(
    qid=QId.Q4,
    text="What were machine learning or natural language processing techniques used for?",
    answer_type="phrase",
    nullable=False,
    topk=10,
    merge_enabled=True,
    stages=("extract", "multihop", "refine"),
)


def _client():
    return BackendClient(
        BackendDescriptor(
            model_id="deberta",
            capability=Capability.EXTRACTIVE_QA,
            endpoint="mock://x",
            params={"seed": 2, "table": TABLE},
        )
    )


def test_answer_multihop_bounds_and_provenance():
    doc = Document(doc_id="d1", text=TEXT)
    with _client() as client:
        answer_set, pre_merge = answer_multihop(
            doc, ["LDA", "SVM"], client, topk_per_sub=1, q4=Q4, policy=MergePolicy()
        )
    assert len(pre_merge) <= 2 * 1
    sub_ids = {s.subquestion_id for s in pre_merge}
    assert len(sub_ids) == 2
    assert "to identify topics" in answer_set.answers
    assert "to classify posts" in answer_set.answers


def test_answer_multihop_topk_prefix_property():
    doc = Document(doc_id="d1", text=TEXT)
    with _client() as client:
        sets = {}
        for k in (1, 3):
            _, pre_merge = answer_multihop(
                doc, ["LDA", "SVM"], client, topk_per_sub=k, q4=Q4, policy=MergePolicy()
            )
            sets[k] = {(s.start, s.end, s.subquestion_id) for s in pre_merge}
    assert sets[1] <= sets[3]


def test_answer_multihop_no_bridges_falls_back_to_baseline():
    doc = Document(doc_id="d1", text=TEXT)
    with _client() as client:
        fallback, pre_merge = answer_multihop(
            doc, [], client, topk_per_sub=1, q4=Q4, policy=MergePolicy()
        )
        baseline = single_hop_baseline(doc, Q4, client, MergePolicy())
    assert pre_merge == []
    assert fallback.as_dict() == baseline.as_dict()


def test_single_hop_baseline_deterministic_topk10():
    doc = Document(doc_id="d1", text=TEXT)
    with _client() as client:
        a = single_hop_baseline(doc, Q4, client, MergePolicy())
        b = single_hop_baseline(doc, Q4, client, MergePolicy())
    assert a.as_dict() == b.as_dict()
    assert len(a.answers) <= 10
    # baseline sees only the generic purpose keyword
    assert list(a.answers) == ["to identify topics"]


def test_bridge_cap_limits_subquestions():
    doc = Document(doc_id="d1", text=TEXT)
    with _client() as client:
        _, pre_merge = answer_multihop(
            doc, ["LDA", "SVM"], client, topk_per_sub=3, q4=Q4, policy=MergePolicy(), bridge_cap=1
        )
    assert {s.subquestion_id for s in pre_merge} == {
        make_subquestions(DEFAULT_SUBQUESTION_TEMPLATE, ["LDA"])[0].subquestion_id
    }


def test_multihop_invalid_topk():
    doc = Document(doc_id="d1", text=TEXT)
    with _client() as client:
        with pytest.raises(StageError):
            answer_multihop(doc, ["LDA"], client, topk_per_sub=0, q4=Q4, policy=MergePolicy())
