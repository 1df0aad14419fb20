#!/usr/bin/env python3
"""Synthesize the stats-matched gold corpus under data/mlpsych/.

The real 52-paper corpus is not redistributable, so this builds placeholder
documents plus gold answers whose per-document span/word allocations are
solved so the aggregate descriptive statistics reproduce the published gold
values (see README's data notes): Q1 mean spans 145/52, mean words 393/52,
mean words-per-span 156/52; Q3 mean words 1352/52 = 26.000 exactly; Q2 17/52
empty. Deterministic: rerunning writes identical bytes.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "mlpsych"
N_DOCS = 52

# (span_count, total_words, doc_count); sums: docs 52, spans 145, words 393,
# integer words-per-span ratios summing 156
Q1_ALLOCATION = [
    (3, 3, 21),
    (4, 4, 5),
    (3, 15, 15),
    (2, 10, 6),
    (1, 5, 5),
]

# (span_count, total_words, doc_count) over answerable docs; 17 docs empty;
# sums: docs 35, spans 64, words 91, ratio sum 46.5
Q2_ALLOCATION = [
    (1, 1, 12),
    (2, 2, 1),
    (3, 3, 2),
    (4, 8, 1),
    (2, 3, 17),
    (3, 6, 2),
]
Q2_EMPTY_DOCS = 17

TECH_BY_WORDS = {
    1: [
        "LDA", "BERT", "XGBoost", "word2vec", "GloVe", "RoBERTa", "fastText",
        "doc2vec", "ELECTRA", "BERTopic", "LSTM", "k-means", "transformers",
        "autoencoders", "BiLSTM", "CRF",
    ],
    2: [
        "random forest", "topic modeling", "naive Bayes", "neural networks",
        "sentiment analysis", "logistic regression", "gradient boosting",
        "word embeddings", "decision trees", "ridge regression",
    ],
    3: [
        "latent Dirichlet allocation", "support vector machines",
        "convolutional neural networks", "recurrent neural networks",
        "named entity recognition", "latent semantic analysis",
        "structural topic modeling", "hierarchical agglomerative clustering",
    ],
    4: [
        "long short-term memory networks", "bidirectional encoder representation models",
        "term frequency document weighting", "deep averaging network classifiers",
        "word mover distance metrics", "latent profile analysis models",
    ],
    5: [
        "latent Dirichlet allocation topic models",
        "bidirectional long short-term memory networks",
        "term frequency inverse document frequency",
        "linear support vector machine classifiers",
        "contextual word embeddings from transformers",
        "neural topic models with metadata",
    ],
    6: [
        "hierarchical latent Dirichlet allocation topic models",
        "bidirectional encoder representations from transformer models",
        "convolutional neural networks with attention pooling",
        "support vector machines with radial kernels",
        "dynamic topic models with structural priors",
    ],
}

SOFT_BY_WORDS = {
    1: [
        "R", "Python", "SPSS", "MATLAB", "Stata", "NVivo", "NLTK", "gensim",
        "spaCy", "quanteda", "Mplus", "scikit-learn", "TensorFlow", "PyTorch",
        "Keras", "LIWC",
    ],
    2: ["Stanford CoreNLP", "Hugging Face", "IBM Watson", "Google Colab", "Amazon Comprehend"],
    3: ["IBM SPSS Statistics", "Hugging Face Transformers", "Stanford CoreNLP toolkit"],
}

Q3_STEMS = [
    ("How does", 2), ("How do", 2), ("Why do", 2), ("When do", 2),
    ("To what extent does", 4), ("Under what conditions does", 4),
]
Q3_SUBJECTS = [
    ("moral outrage", 2), ("online self-disclosure", 2), ("status signaling", 2),
    ("emotional contagion", 2), ("identity threat", 2), ("perceived group cohesion", 3),
    ("exposure to opposing views", 4), ("language style matching", 3),
    ("norm enforcement in comments", 4), ("anonymity in discussion threads", 4),
]
Q3_VERBS = [("predict", 1), ("shape", 1), ("relate to", 2), ("influence", 1), ("amplify", 1), ("moderate", 1)]
Q3_OBJECTS = [
    ("sharing behavior", 2), ("collective action", 2), ("intergroup trust", 2),
    ("helping intentions", 2), ("network formation", 2), ("polarization of attitudes", 3),
    ("willingness to cooperate", 3), ("support seeking", 2),
]
Q3_TAILS = [
    ("in online communities", 3), ("across cultural contexts", 3),
    ("during political campaigns", 3), ("among adolescent users", 3),
    ("over extended time periods", 4), ("in large discussion forums", 4),
    ("under conditions of anonymity", 4), ("for first-time contributors", 3),
    ("when moderation is visible", 4), ("despite repeated exposure", 3),
    ("in high-stakes settings", 3), ("across platform boundaries", 3),
]

Q4_VERBS = [
    ("classify", 1), ("detect", 1), ("measure", 1), ("summarize", 1),
    ("extract", 1), ("predict", 1), ("cluster", 1), ("annotate", 1),
    ("score", 1), ("rank", 1), ("filter", 1), ("segment", 1),
]
Q4_OBJECTS = [
    ("user comments", 2), ("diary entries", 2), ("forum threads", 2),
    ("open-ended survey responses", 3), ("news coverage", 2), ("chat transcripts", 2),
    ("moral framing in posts", 4), ("expressions of gratitude", 3),
    ("interview passages", 2), ("peer feedback", 2), ("status updates", 2),
    ("reader reactions", 2), ("argument structure in essays", 4),
]
Q4_TAILS = [
    ("across the full study period", 5), ("for the main preregistered analysis", 5),
    ("before the qualitative coding stage", 5), ("within each participant cohort", 4),
    ("at scale without manual review", 5), ("to support the robustness checks", 5),
    ("in the replication sample", 4), ("under strict privacy constraints", 4),
    ("per wave", 2), ("by cohort", 2), ("each week", 2), ("by hand", 2),
    ("for every speaker", 3), ("in both conditions", 3), ("after manual screening", 3),
    ("against expert labels", 3), ("during pilot testing", 3),
]


def _compose(rng: random.Random, parts_budget: int, stems, subjects, verbs, objects, tails) -> str:
    """Compose a sentence with exactly parts_budget words by stacking tail
    qualifiers; retries with different components until the count lands."""
    for _ in range(200):
        stem, n1 = rng.choice(stems)
        subj, n2 = rng.choice(subjects)
        verb, n3 = rng.choice(verbs)
        obj, n4 = rng.choice(objects)
        words = n1 + n2 + n3 + n4
        if words > parts_budget:
            continue
        chosen: list[str] = []
        remaining = parts_budget - words
        pool = [t for t in tails]
        rng.shuffle(pool)
        for tail, n in pool:
            if n <= remaining:
                chosen.append(tail)
                remaining -= n
            if remaining == 0:
                break
        if remaining != 0:
            continue
        sentence = " ".join([stem, subj, verb, obj, *chosen])
        assert len(sentence.split()) == parts_budget
        return sentence
    raise RuntimeError(f"cannot compose a {parts_budget}-word sentence")


def _make_q3(rng: random.Random, n_words: int, seen: set[str]) -> str:
    for _ in range(500):
        s = _compose(rng, n_words, Q3_STEMS, Q3_SUBJECTS, Q3_VERBS, Q3_OBJECTS, Q3_TAILS)
        if s not in seen:
            seen.add(s)
            return s
    raise RuntimeError("ran out of distinct research questions")


def _make_q4(rng: random.Random, seen: set[str]) -> str:
    for _ in range(500):
        verb, n1 = rng.choice(Q4_VERBS)
        obj, n2 = rng.choice(Q4_OBJECTS)
        have = 1 + n1 + n2
        pool = [t for t in Q4_TAILS]
        rng.shuffle(pool)
        chosen = []
        remaining = 10 - have
        for tail, n in pool:
            if n <= remaining:
                chosen.append(tail)
                remaining -= n
            if remaining == 0:
                break
        if remaining != 0:
            continue
        s = " ".join(["to", verb, obj, *chosen])
        assert len(s.split()) == 10
        if s not in seen:
            seen.add(s)
            return s
    raise RuntimeError("ran out of distinct purposes")


def _pick_answers(rng: random.Random, pool_by_words: dict[int, list[str]], spans: int, words: int) -> list[str]:
    """Pick `spans` distinct names whose word counts sum to `words`."""
    sizes = sorted(pool_by_words)
    for _ in range(2000):
        counts: list[int] = []
        remaining_words = words
        ok = True
        for i in range(spans):
            remaining_spans = spans - i - 1
            lo = max(min(sizes), remaining_words - remaining_spans * max(sizes))
            hi = min(max(sizes), remaining_words - remaining_spans * min(sizes))
            options = [s for s in sizes if lo <= s <= hi and pool_by_words.get(s)]
            if not options:
                ok = False
                break
            c = rng.choice(options)
            counts.append(c)
            remaining_words -= c
        if not ok or remaining_words != 0:
            continue
        answers: list[str] = []
        used: set[str] = set()
        for c in counts:
            candidates = [a for a in pool_by_words[c] if a not in used]
            if not candidates:
                break
            a = rng.choice(candidates)
            used.add(a)
            answers.append(a)
        if len(answers) == spans:
            return answers
    raise RuntimeError(f"cannot allocate {spans} spans / {words} words")


def _expand_allocation(rng: random.Random, allocation) -> list[tuple[int, int]]:
    per_doc = []
    for spans, words, count in allocation:
        per_doc.extend([(spans, words)] * count)
    rng.shuffle(per_doc)
    return per_doc


def main() -> int:
    rng = random.Random(20240521)
    OUT.mkdir(parents=True, exist_ok=True)

    q1_plan = _expand_allocation(rng, Q1_ALLOCATION)
    assert len(q1_plan) == N_DOCS

    q2_plan = _expand_allocation(rng, Q2_ALLOCATION) + [(0, 0)] * Q2_EMPTY_DOCS
    rng.shuffle(q2_plan)
    assert len(q2_plan) == N_DOCS

    # Q3: 11 docs with 2 answers, 41 with 1; total words 1352 (mean 26.000)
    q3_spans = [2] * 11 + [1] * 41
    rng.shuffle(q3_spans)
    q3_words = [21 if s == 1 else 42 for s in q3_spans]
    deficit = 1352 - sum(q3_words)
    i = 0
    while deficit != 0:
        step = 1 if deficit > 0 else -1
        q3_words[i % N_DOCS] += step
        deficit -= step
        i += 1
    assert sum(q3_words) == 1352

    docs = []
    gold_rows = []
    q3_seen: set[str] = set()
    q4_seen: set[str] = set()
    for i in range(N_DOCS):
        doc_id = f"mlp{i + 1:03d}"
        s1, w1 = q1_plan[i]
        q1 = _pick_answers(rng, TECH_BY_WORDS, s1, w1)
        s2, w2 = q2_plan[i]
        q2 = _pick_answers(rng, SOFT_BY_WORDS, s2, w2) if s2 else []
        n3 = q3_spans[i]
        total3 = q3_words[i]
        split3 = [total3] if n3 == 1 else [total3 // 2, total3 - total3 // 2]
        q3 = [_make_q3(rng, w, q3_seen) for w in split3]
        # purposes mirror the technique count: 10 words each
        q4 = [_make_q4(rng, q4_seen) for _ in range(s1)]

        tech_list = ", ".join(q1)
        soft_list = ", ".join(q2) if q2 else "no dedicated software named"
        text = (
            f"Placeholder full text for study {i + 1}. "
            f"The authors applied {tech_list} to their corpus of participant language. "
            f"Analysis tooling: {soft_list}. "
            f"Guiding question: {q3[0]}? "
            + " ".join(f"The approach was used {p}." for p in q4)
            + " Body text of the original article is not redistributable; this stub "
            "preserves identifiers and answer statistics only."
        )
        docs.append(
            {
                "doc_id": doc_id,
                "text": text,
                "meta": {"title": f"Synthetic stand-in {i + 1}", "year": str(2012 + i % 12), "source": "synthetic"},
            }
        )
        for qid, answers in (("Q1", q1), ("Q2", q2), ("Q3", q3), ("Q4", q4)):
            gold_rows.append({"doc_id": doc_id, "qid": qid, "gold_answers": answers})

    with (OUT / "documents.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for row in docs:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    with (OUT / "gold.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for row in gold_rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    sys.path.insert(0, str(ROOT / "src"))
    from docpipe.types import default_question_specs

    specs = [spec.as_dict() for spec in default_question_specs().values()]
    (OUT / "questions.json").write_text(
        json.dumps(specs, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    # verify the aggregate statistics
    by_qid: dict[str, list[list[str]]] = {}
    for row in gold_rows:
        by_qid.setdefault(row["qid"], []).append(row["gold_answers"])

    def stats(lists):
        nonempty = [a for a in lists if a]
        mean_spans = sum(len(a) for a in nonempty) / len(nonempty)
        mean_words = sum(sum(len(x.split()) for x in a) for a in lists) / len(lists)
        ratios = [sum(len(x.split()) for x in a) / len(a) for a in nonempty]
        return mean_spans, mean_words, sum(ratios) / len(ratios)

    s, w, r = stats(by_qid["Q1"])
    assert abs(s - 2.788) <= 0.01 and abs(s - 2.78) <= 0.01, s
    assert abs(w - 7.56) <= 0.01, w
    assert abs(r - 2.998) <= 0.01, r
    _, w3, _ = stats(by_qid["Q3"])
    assert abs(w3 - 26.00) <= 0.005, w3
    empty_pct = 100 * sum(1 for a in by_qid["Q2"] if not a) / N_DOCS
    assert round(empty_pct) == 33, empty_pct
    s2, _, r2 = stats(by_qid["Q2"])
    print(f"Q1 spans {s:.3f} words {w:.3f} wps {r:.3f}")
    print(f"Q2 spans {s2:.3f} wps {r2:.3f} empty {empty_pct:.0f}%")
    print(f"Q3 words {w3:.3f}")
    print(f"wrote {N_DOCS} documents to {OUT}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
