import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docpipe.refine import (
    MergePolicy,
    build_answer_set,
    dedup_answers,
    merge_spans,
    squad_normalize,
    trim_special,
)
from docpipe.types import Document, QId, Span

# Rule-table fixture: the contract for special-character trimming.
TRIM_CASES = [
    ("(LDA,", "LDA"),
    ("SVM", "SVM"),
    ("“topic modeling”.", "topic modeling"),
    ("support vector machines (SVMs).", "support vector machines (SVMs)"),
    ("(SVMs)", "SVMs"),
    ("--XGBoost--", "XGBoost"),
    ("  R  ", "R"),
    ("", ""),
    ("...", ""),
    ("latent Dirichlet allocation", "latent Dirichlet allocation"),
    ("e.g., BERT", "e.g., BERT"),
    ("[CLS] token", "CLS] token"),
    ("word2vec;", "word2vec"),
    ("(a(b)c)", "a(b)c"),
    ("1,000", "1,000"),
    ("†significant†", "significant"),
    ("model)", "model"),
    ("model (2)", "model (2)"),
    ("«BERT»", "BERT"),
    ("#hashtag", "hashtag"),
    ("C++", "C"),
    (".NET", "NET"),
    ("f(x) = y…", "f(x) = y"),
    ("(incomplete", "incomplete"),
    ("näive—Bayes.", "näive—Bayes"),
    ("42%", "42"),
    ("[10, 25)", "10, 25"),
    ("quanteda (v2.1)", "quanteda (v2.1)"),
    ("’twas", "twas"),
    ("a", "a"),
]


@pytest.mark.parametrize("raw,expected", TRIM_CASES)
def test_trim_special_cases(raw, expected):
    assert trim_special(raw) == expected


@pytest.mark.parametrize("raw,_", TRIM_CASES)
def test_trim_special_idempotent_on_fixture(raw, _):
    once = trim_special(raw)
    assert trim_special(once) == once


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("The SVM.", "svm"),
        ("a  b", "b"),
        ("XGBoost", "xgboost"),
        ("An Analysis of the Data", "analysis of data"),
        ("state-of-the-art", "stateoftheart"),
        ("  spaced   out  ", "spaced out"),
        ("", ""),
        ("A, an; THE!", ""),
    ],
)
def test_squad_normalize(raw, expected):
    assert squad_normalize(raw) == expected


def test_dedup_answers():
    assert dedup_answers(["LDA", "lda.", "SVM"]) == ["LDA", "SVM"]
    assert dedup_answers([]) == []
    assert dedup_answers(["a", "the a"]) == ["a"]


DOC = Document(
    doc_id="d1",
    text="0123456789support vector machines for text. latent Dirichlet allocation was used.",
)


def _span(start, end, score=0.5, model="m"):
    return Span(text=DOC.text[start:end], start=start, end=end, score=score, model_id=model)


def test_merge_overlapping():
    merged = merge_spans(
        [_span(10, 24, 0.7), _span(18, 33, 0.9)], DOC, MergePolicy()
    )
    assert len(merged) == 1
    assert (merged[0].start, merged[0].end) == (10, 33)
    assert merged[0].text == "support vector machines"
    assert merged[0].score == 0.9


def test_merge_respects_gap():
    spans = [_span(10, 24), _span(45, 61)]
    merged = merge_spans(spans, DOC, MergePolicy(allow_adjacent_gap=1))
    assert [(s.start, s.end) for s in merged] == [(10, 24), (45, 61)]


def test_merge_adjacent_within_gap():
    merged = merge_spans([_span(10, 17), _span(18, 24)], DOC, MergePolicy(allow_adjacent_gap=1))
    assert [(s.start, s.end) for s in merged] == [(10, 24)]


def test_merge_containment_same_start():
    doc = Document(doc_id="d2", text="latent Dirichlet allocation and more")
    spans = [
        Span(text=doc.text[0:16], start=0, end=16, score=0.5, model_id="m"),
        Span(text=doc.text[0:27], start=0, end=27, score=0.4, model_id="m"),
    ]
    merged = merge_spans(spans, doc, MergePolicy())
    assert len(merged) == 1
    assert merged[0].text == "latent Dirichlet allocation"
    assert merged[0].score == 0.5


def test_merge_containment_disabled_keeps_inner_span():
    doc = Document(doc_id="d2", text="latent Dirichlet allocation and more")
    spans = [
        Span(text=doc.text[0:27], start=0, end=27, score=0.4, model_id="m"),
        Span(text=doc.text[7:16], start=7, end=16, score=0.5, model_id="m"),
    ]
    merged = merge_spans(spans, doc, MergePolicy(containment_merge=False))
    assert [(s.start, s.end) for s in merged] == [(0, 27), (7, 16)]


def test_merge_disabled_is_identity():
    spans = [_span(18, 33), _span(10, 24)]
    merged = merge_spans(spans, DOC, MergePolicy(enabled=False))
    assert [(s.start, s.end) for s in merged] == [(10, 24), (18, 33)]


@st.composite
def random_spans(draw):
    n = draw(st.integers(min_value=0, max_value=12))
    spans = []
    for _ in range(n):
        start = draw(st.integers(min_value=0, max_value=len(DOC.text) - 2))
        end = draw(st.integers(min_value=start + 1, max_value=len(DOC.text)))
        score = draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
        spans.append(Span(text=DOC.text[start:end], start=start, end=end, score=score, model_id="m"))
    return spans


@given(random_spans())
@settings(max_examples=200, deadline=None)
def test_merge_properties(spans):
    policy = MergePolicy(allow_adjacent_gap=1)
    merged = merge_spans(spans, DOC, policy)
    assert len(merged) <= len(spans)
    # idempotent
    assert merge_spans(merged, DOC, policy) == merged
    # pairwise non-overlapping and slice-consistent
    for a, b in zip(merged, merged[1:]):
        assert a.end <= b.start
    for s in merged:
        assert DOC.text[s.start : s.end] == s.text
    # every input span is contained in exactly one output span
    for s in spans:
        containers = [o for o in merged if o.start <= s.start and s.end <= o.end]
        assert len(containers) == 1
    if spans:
        covered = sum(s.end - s.start for s in merged)
        assert covered >= max(s.end - s.start for s in spans)


@given(st.text(max_size=60))
@settings(max_examples=300, deadline=None)
def test_normalize_and_trim_idempotent_never_lengthen(text):
    normalized = squad_normalize(text)
    assert squad_normalize(normalized) == normalized
    assert len(normalized) <= len(text)
    trimmed = trim_special(text)
    assert trim_special(trimmed) == trimmed
    assert len(trimmed) <= len(text)


def test_build_answer_set_orders_trims_dedups():
    doc = Document(doc_id="d3", text="We used (LDA) and lda. for topics with SVM here.")
    spans = [
        Span(text="(LDA)", start=8, end=13, score=0.9, model_id="m"),
        Span(text="lda.", start=18, end=22, score=0.7, model_id="m"),
        Span(text="SVM", start=39, end=42, score=0.8, model_id="m"),
    ]
    assert doc.text[8:13] == "(LDA)"
    assert doc.text[18:22] == "lda."
    assert doc.text[39:42] == "SVM"
    result = build_answer_set(doc, QId.Q1, spans, MergePolicy(), nullable=False)
    assert result.answers == ("LDA", "SVM")
    assert result.scores == (0.9, 0.8)
    # the duplicate folded its provenance into the kept answer
    assert len(result.provenance[0].spans) == 2
    assert not result.empty_means_unanswerable
