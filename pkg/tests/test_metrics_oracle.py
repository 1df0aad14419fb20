"""Randomized equivalence between the metric implementations and the
independent brute-force references in oracles.py."""

import random

from docpipe.metrics import MetricConfig, exact_match, f1_token, mentions_match
from docpipe.refine import squad_normalize

from .oracles import em_ref, f1_ref, mentions_ref, normalize_ref

ALPHABET = "abc XY12().,;-'\"? the an a"
WORDS = [
    "the", "a", "an", "LDA", "lda", "support", "vector", "machines", "(SVMs)",
    "XG", "Boost", "XGBoost", "topic", "models", "b", "B", "1,000", "?", "(x)",
]


def _random_string(rng: random.Random) -> str:
    if rng.random() < 0.5:
        return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 24)))
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, 6)))


def test_normalize_matches_reference():
    rng = random.Random(421)
    for _ in range(2000):
        s = _random_string(rng)
        assert squad_normalize(s) == normalize_ref(s), repr(s)


def test_f1_em_mentions_match_reference_on_randomized_pairs():
    rng = random.Random(99)
    cfg_cs = MetricConfig(mentions_case_sensitive=True)
    cfg_ci = MetricConfig(mentions_case_sensitive=False)
    for _ in range(1000):
        gold = _random_string(rng)
        pred = _random_string(rng)
        preds = [_random_string(rng) for _ in range(rng.randint(0, 3))] + [pred]
        assert f1_token(gold, pred) == f1_ref(gold, pred), (gold, pred)
        assert exact_match(gold, pred) == em_ref(gold, pred), (gold, pred)
        assert mentions_match(gold, preds, cfg_cs) == mentions_ref(gold, preds, True), (gold, preds)
        assert mentions_match(gold, preds, cfg_ci) == mentions_ref(gold, preds, False), (gold, preds)
