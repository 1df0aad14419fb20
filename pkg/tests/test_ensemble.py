import random

import pytest

from docpipe.ensemble import EnsembleSpec, combine
from docpipe.metrics import Embedder, MetricConfig, score_document
from docpipe.protocol import BackendClient, BackendDescriptor, Capability
from docpipe.types import AnswerSet, GoldAnnotation, QId


def _set(answers, qid=QId.Q1, doc_id="d1", scores=None, unanswerable=False):
    return AnswerSet(
        doc_id=doc_id,
        qid=qid,
        answers=tuple(answers),
        scores=tuple(scores or [0.5] * len(answers)),
        empty_means_unanswerable=unanswerable,
    )


def test_ensemble_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(qid=QId.Q1, member_model_ids=("deberta",))
    with pytest.raises(ValueError):
        EnsembleSpec(qid=QId.Q1, member_model_ids=("deberta", "deberta"))


def test_combine_union():
    combined = combine([_set(["a", "b"]), _set(["b", "c"])])
    assert set(combined.answers) == {"a", "b", "c"}


def test_combine_empty_sets_valid_for_nullable():
    combined = combine([_set([], qid=QId.Q2, unanswerable=True), _set([], qid=QId.Q2, unanswerable=True)])
    assert combined.answers == ()
    assert combined.empty_means_unanswerable


def test_combine_size_at_least_members():
    a = _set(["a", "b"])
    b = _set(["c"])
    combined = combine([a, b])
    assert len(combined.answers) >= max(len(a.answers), len(b.answers))


def test_combine_rejects_mismatched_inputs():
    with pytest.raises(ValueError):
        combine([_set(["a"]), _set(["b"], doc_id="other")])
    with pytest.raises(ValueError):
        combine([_set(["a"]), _set(["b"], qid=QId.Q3)])


def test_combine_order_score_then_member_then_lexicographic():
    a = _set(["mid", "low"], scores=[0.5, 0.2])
    b = _set(["high", "also-mid"], scores=[0.9, 0.5])
    combined = combine([a, b])
    # score 0.9 first; the two 0.5 answers tie -> member order (a first); 0.2 last
    assert list(combined.answers) == ["high", "mid", "also-mid", "low"]


def test_combine_dedups_and_keeps_best_score():
    a = _set(["LDA"], scores=[0.6])
    b = _set(["lda."], scores=[0.9])
    combined = combine([a, b])
    assert list(combined.answers) == ["LDA"]
    assert combined.scores == (0.9,)


def test_empty_union_nonempty_loses_negative_credit():
    embed = BackendClient(
        BackendDescriptor(
            model_id="e", capability=Capability.EMBED, endpoint="mock://e", params={"seed": 4}
        )
    )
    embedder = Embedder(embed)
    cfg = MetricConfig()
    gold = GoldAnnotation(doc_id="d1", qid=QId.Q2, gold_answers=())
    empty = _set([], qid=QId.Q2, unanswerable=True)
    nonempty = _set(["R"], qid=QId.Q2)
    combined = combine([empty, nonempty])
    assert not combined.is_empty
    s_empty = score_document(gold, empty, cfg, embedder)
    s_combined = score_document(gold, combined, cfg, embedder)
    assert s_empty.em == 1.0
    assert s_combined.em == 0.0  # combining can lower the negative-sample score
    embed.close()


def test_union_monotonicity_randomized():
    embed = BackendClient(
        BackendDescriptor(
            model_id="e", capability=Capability.EMBED, endpoint="mock://e", params={"seed": 4}
        )
    )
    embedder = Embedder(embed)
    cfg = MetricConfig()
    rng = random.Random(11)
    vocab = ["LDA", "SVM", "BERT", "random forest", "XGBoost", "naive Bayes", "CRF", "word2vec"]
    for _ in range(100):
        gold_answers = rng.sample(vocab, rng.randint(1, 4))
        gold = GoldAnnotation(doc_id="d1", qid=QId.Q1, gold_answers=tuple(gold_answers))
        a = _set(rng.sample(vocab, rng.randint(0, 4)))
        b = _set(rng.sample(vocab, rng.randint(0, 4)))
        u = combine([a, b])
        sa = score_document(gold, a, cfg, embedder)
        sb = score_document(gold, b, cfg, embedder)
        su = score_document(gold, u, cfg, embedder)
        for metric in ("f1", "em", "smat", "mentions"):
            assert getattr(su, metric) >= max(getattr(sa, metric), getattr(sb, metric)) - 1e-12
    embed.close()
