import random

import pytest

from docpipe.errors import StageError
from docpipe.extraction import answer_question, extract_for_question, window_document
from docpipe.protocol import BackendClient, BackendDescriptor, Capability
from docpipe.types import Document, QId, QuestionSpec


def _doc(text, doc_id="d1"):
    return Document(doc_id=doc_id, text=text)


def test_window_arithmetic():
    text = " ".join(["w"] * 500)[:1000].ljust(1000, "w")
    doc = _doc(text)
    windows = window_document(doc, window_chars=400, stride_chars=300)
    assert [w.start for w in windows] == [0, 300, 600]
    assert windows[-1].end == 1000


def test_window_degenerate_short_doc():
    doc = _doc("short text")
    windows = window_document(doc, window_chars=400, stride_chars=300)
    assert len(windows) == 1
    assert (windows[0].start, windows[0].end) == (0, len(doc.text))


def test_window_requires_valid_stride():
    with pytest.raises(ValueError):
        window_document(_doc("x" * 100), window_chars=10, stride_chars=0)
    with pytest.raises(ValueError):
        window_document(_doc("x" * 100), window_chars=10, stride_chars=11)


def _fixture_docs():
    rng = random.Random(7)
    words = ["alpha", "bet", "gamma", "deltaic", "ep", "zetas", "etc", "thetalike"]
    docs = []
    for i in range(5):
        n = rng.randint(400, 900)
        docs.append(_doc(" ".join(rng.choice(words) for _ in range(n)), doc_id=f"f{i}"))
    return docs


def test_window_coverage_and_word_snapping_brute_force():
    # Brute-force oracle over all windows of 5 fixture docs.
    for doc in _fixture_docs():
        for window_chars, stride_chars in [(400, 300), (512, 256), (1000, 900)]:
            windows = window_document(doc, window_chars, stride_chars)
            starts = [w.start for w in windows]
            assert starts == sorted(starts)
            assert windows[0].start == 0
            assert windows[-1].end == len(doc.text)
            for a, b in zip(windows, windows[1:]):
                assert b.start <= a.end  # coverage: no gaps
            for w in windows:
                assert doc.text[w.start : w.end] == w.text
                if w.start > 0:  # never starts mid-word
                    assert doc.text[w.start].isspace() or doc.text[w.start - 1].isspace()


def test_window_no_overlap_partition():
    doc = _doc("x" * 1000)
    windows = window_document(doc, window_chars=250, stride_chars=250)
    assert [(w.start, w.end) for w in windows] == [(0, 250), (250, 500), (500, 750), (750, 1000)]


TABLE = {
    "entries": [
        {
            "selector": "techniques",
            "keywords": [
                {"surface": "latent Dirichlet allocation", "score": 0.95},
                {"surface": "LDA", "score": 0.9},
                {"surface": "support vector machines", "score": 0.88},
                {"surface": "random forest", "score": 0.85},
                {"surface": "naive Bayes", "score": 0.77},
            ],
        }
    ]
}


def _client(model_id="deberta"):
    return BackendClient(
        BackendDescriptor(
            model_id=model_id,
            capability=Capability.EXTRACTIVE_QA,
            endpoint="mock://x",
            params={"seed": 3, "table": TABLE},
        )
    )


def _q1(topk=20):
    return QuestionSpec(
        qid=QId.Q1,
        text="What techniques were used?",
        answer_type="entity",
        nullable=False,
        topk=topk,
        merge_enabled=True,
        stages=("extract", "refine"),
    )


PADDING = "This sentence is neutral filler about survey methods and coding. "


def test_answer_question_mock_three_techniques():
    text = (
        PADDING * 10
        + "We applied latent Dirichlet allocation to the corpus. "
        + PADDING * 10
        + "A random forest model and naive Bayes were baselines. "
        + PADDING * 10
    )
    doc = _doc(text)
    with _client() as client:
        outcome = answer_question(doc, _q1(), client, window_chars=400, stride_chars=300)
    texts = [s.text for s in outcome.spans]
    assert texts == ["latent Dirichlet allocation", "random forest", "naive Bayes"]
    scores = [s.score for s in outcome.spans]
    assert scores == sorted(scores, reverse=True)
    for s in outcome.spans:
        assert doc.text[s.start : s.end] == s.text
    assert not outcome.forced_empty


def test_overlapping_windows_dedup_keeps_max_score():
    # the same span lands in two overlapping windows; one result survives
    text = PADDING * 3 + "We used LDA here. " + PADDING * 3
    doc = _doc(text)
    with _client() as client:
        outcome = answer_question(doc, _q1(), client, window_chars=300, stride_chars=100)
    lda = [s for s in outcome.spans if s.text == "LDA"]
    assert len(lda) == 1
    assert lda[0].score == 0.9


def test_nullable_empty_is_valid_forced_empty_flagged():
    doc = _doc(PADDING * 5)
    with _client() as client:
        q2 = QuestionSpec(
            qid=QId.Q2,
            text="What software was used to perform techniques?",
            answer_type="entity",
            nullable=True,
            topk=5,
            merge_enabled=False,
            stages=("extract",),
        )
        outcome = answer_question(doc, q2, client)
        assert outcome.spans == ()
        assert not outcome.forced_empty

        outcome = answer_question(doc, _q1(), client)
        assert outcome.spans == ()
        assert outcome.forced_empty


def test_topk_prefix_monotonicity():
    text = (
        PADDING * 4
        + "latent Dirichlet allocation, LDA, support vector machines, random forest, naive Bayes. "
        + PADDING * 4
    )
    doc = _doc(text)
    with _client() as client:
        results = {
            k: answer_question(doc, _q1(k), client, top_k=k, window_chars=300, stride_chars=200).spans
            for k in (1, 2, 3, 5)
        }
    for a, b in [(1, 2), (2, 3), (3, 5)]:
        assert results[a] == results[b][: len(results[a])]


def test_backend_failure_names_window():
    doc = _doc("x" * 500)
    desc = BackendDescriptor(
        model_id="m",
        capability=Capability.EXTRACTIVE_QA,
        endpoint="mock://x",
        max_context=100,  # windows of 200 chars overflow -> stage error
        params={"seed": 1, "table": TABLE},
    )
    with BackendClient(desc) as client:
        with pytest.raises(StageError) as err:
            extract_for_question(doc, "q", client, 5, nullable=True, window_chars=200, stride_chars=150)
    assert "window 0" in str(err.value)
