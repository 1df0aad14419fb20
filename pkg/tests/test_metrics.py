import pytest

from docpipe.metrics import (
    Embedder,
    MetricConfig,
    aggregate,
    exact_match,
    f1_token,
    mentions_match,
    score_document,
    similar_match,
)
from docpipe.protocol.client import BackendClient
from docpipe.protocol.wire import BackendDescriptor, Capability
from docpipe.types import AnswerSet, GoldAnnotation, QId

CFG = MetricConfig()


@pytest.fixture(scope="module")
def embedder():
    descriptor = BackendDescriptor(
        model_id="e5-mock",
        capability=Capability.EMBED,
        endpoint="mock://embed",
        params={"seed": 101},
    )
    client = BackendClient(descriptor)
    yield Embedder(client)
    client.close()


def test_f1_word_overlap():
    assert f1_token("extreme gradient boosting trees", "gradient boosting") == pytest.approx(2 / 3)


def test_f1_identity():
    assert f1_token("svm", "svm") == 1.0


def test_f1_no_common_tokens():
    assert f1_token("XGBoost", "extreme gradient boosting trees") == 0.0


def test_f1_multiset_not_set():
    # "b b" vs "b": common counts min(2, 1) = 1, P = 1, R = 1/2
    assert f1_token("b b", "b") == pytest.approx(2 * 1 * 0.5 / 1.5)


def test_f1_asymmetric_roles():
    # recall divides by gold length, precision by prediction length
    assert f1_token("x y z w", "x") == pytest.approx(2 * 1 * 0.25 / 1.25)
    assert f1_token("x", "x y z w") == pytest.approx(2 * 0.25 * 1 / 1.25)


def test_f1_both_empty():
    assert f1_token("", "") == 1.0
    assert f1_token("the", "a") == 1.0  # both normalize to nothing


def test_exact_match():
    assert exact_match("The SVM.", "svm")
    assert not exact_match("XGBoost", "extreme gradient boosting trees")
    assert exact_match("", "")


def test_mentions_plain_substring():
    assert mentions_match("LDA", ["we ran LDA models"], CFG)
    assert not mentions_match("LDA", ["we ran lda models"], CFG)  # case-sensitive default
    assert mentions_match("LDA", ["we ran lda models"], MetricConfig(mentions_case_sensitive=False))


def test_mentions_paren_decomposition():
    gold = "support vector machines (SVMs)"
    assert mentions_match(gold, ["support vector machines"], CFG)
    assert mentions_match(gold, ["SVMs"], CFG)
    # equality, not substring, for the decomposed parts
    assert not mentions_match(gold, ["support vector"], CFG)
    # the in-parenthesis text is matched literally
    assert not mentions_match(gold, ["SVM"], CFG)


def test_mentions_whitespace_removal():
    assert mentions_match("XGBoost", ["XG Boost"], CFG)
    assert mentions_match("a b c", ["xab cy"], CFG)


def test_exact_match_implies_f1_and_mentions_on_case_matched_pairs():
    pairs = [("svm", "svm"), ("topic  modeling", "topic modeling"), ("LDA model", "LDA  model")]
    for gold, pred in pairs:
        assert exact_match(gold, pred)
        assert f1_token(gold, pred) == 1.0
        assert mentions_match(gold, [pred], CFG)


def test_similar_match_identity_and_frozen_pair(embedder):
    assert similar_match("LDA", ["LDA"], embedder, 0.8)
    # frozen from the deterministic hash embedding (seed 101, dim 64)
    from docpipe.metrics import cosine

    vecs = embedder.vectors(["XGBoost", "extreme gradient boosting trees"])
    assert cosine(vecs[0], vecs[1]) == pytest.approx(-0.16551162547320863)
    assert not similar_match("XGBoost", ["extreme gradient boosting trees"], embedder, 0.8)


def test_similar_match_empty_preds(embedder):
    assert not similar_match("LDA", [], embedder, 0.8)


def _answers(qid, *answers):
    return AnswerSet(doc_id="d1", qid=qid, answers=tuple(answers))


def test_score_document_all_match(embedder):
    gold = GoldAnnotation(doc_id="d1", qid=QId.Q1, gold_answers=("LDA", "SVM"))
    scores = score_document(gold, _answers(QId.Q1, "LDA", "SVM"), CFG, embedder)
    assert scores.f1 == scores.em == scores.smat == scores.mentions == 1.0


def test_score_document_half_em(embedder):
    gold = GoldAnnotation(doc_id="d1", qid=QId.Q1, gold_answers=("LDA", "random forest"))
    scores = score_document(gold, _answers(QId.Q1, "LDA", "decision tree"), CFG, embedder)
    assert scores.em == 0.5
    assert scores.smat == 0.5
    assert scores.mentions == 0.5
    assert scores.f1 == pytest.approx(0.5)


def test_negative_sample_rule(embedder):
    gold = GoldAnnotation(doc_id="d1", qid=QId.Q2, gold_answers=())
    empty = AnswerSet(doc_id="d1", qid=QId.Q2, answers=(), empty_means_unanswerable=True)
    scores = score_document(gold, empty, CFG, embedder)
    assert (scores.f1, scores.em, scores.smat, scores.mentions) == (1.0, 1.0, 1.0, 1.0)
    scores = score_document(gold, _answers(QId.Q2, "R"), CFG, embedder)
    assert (scores.f1, scores.em, scores.smat, scores.mentions) == (0.0, 0.0, 0.0, 0.0)


def test_score_document_qid_mismatch(embedder):
    gold = GoldAnnotation(doc_id="d1", qid=QId.Q1, gold_answers=("x",))
    with pytest.raises(ValueError):
        score_document(gold, _answers(QId.Q2, "x"), CFG, embedder)


def test_metrics_invariant_under_permutation(embedder):
    gold = GoldAnnotation(doc_id="d1", qid=QId.Q1, gold_answers=("LDA", "SVM", "BERT"))
    a = score_document(gold, _answers(QId.Q1, "LDA", "CRF", "BERT"), CFG, embedder)
    b = score_document(gold, _answers(QId.Q1, "BERT", "LDA", "CRF"), CFG, embedder)
    assert a == b


def test_aggregate_means():
    from docpipe.metrics import DocScores

    per_doc = {
        ("d1", "Q1", "sys"): DocScores(f1=1.0, em=1.0, smat=1.0, mentions=1.0),
        ("d2", "Q1", "sys"): DocScores(f1=0.0, em=0.0, smat=0.0, mentions=0.0),
    }
    report = aggregate(per_doc, metadata={"tau": 0.8})
    assert report.corpus[("Q1", "sys")].f1 == 0.5
    assert report.metadata["tau"] == 0.8

    single = aggregate({("d1", "Q1", "sys"): DocScores(f1=0.25, em=0.0, smat=1.0, mentions=0.5)})
    assert single.corpus[("Q1", "sys")] == single.per_doc[("d1", "Q1", "sys")]


def test_report_round_trip():
    from docpipe.metrics import DocScores, MetricReport

    per_doc = {("d1", "Q1", "raw/m"): DocScores(f1=0.5, em=0.0, smat=1.0, mentions=0.5)}
    report = aggregate(per_doc, metadata={"tau": 0.8})
    clone = MetricReport.from_dict(report.as_dict())
    assert clone.per_doc == report.per_doc
    assert clone.corpus == report.corpus
    assert clone.metadata == report.metadata
