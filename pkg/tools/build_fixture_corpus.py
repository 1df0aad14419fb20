#!/usr/bin/env python3
"""Build the 5-document fixture corpus, its mock keyword table, and the
mock/replay config files. Fully hand-specified and deterministic; rerunning
rewrites identical bytes."""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

FILLER = (
    "Participants completed a battery of questionnaires about daily habits and "
    "group membership. Coders reviewed transcripts and resolved disagreements "
    "through discussion. The procedure followed standard ethical guidance and "
    "all materials are available from the authors. Analyses proceeded in three "
    "stages described below, and robustness checks appear in the appendix. "
    "Recruitment continued until the preregistered sample size was reached, and "
    "attrition was low across waves. Descriptive summaries of the demographic "
    "composition appear in the supplementary tables. Interrater agreement was "
    "computed on a held-out subset of the coded material and exceeded the "
    "preregistered threshold. Sensitivity analyses varying the inclusion "
    "criteria produced the same substantive conclusions throughout. "
)

DOCS = [
    {
        "doc_id": "fx001",
        "title": "Moral language and sharing",
        "body": (
            "This study asked: How does moral language in social media posts predict "
            "sharing behavior? We collected two million public posts over one year. "
            + FILLER
            + "We fitted latent Dirichlet allocation topic models to the corpus after "
            "standard preprocessing. A follow-up run confirmed that latent Dirichlet "
            "allocation recovered stable themes. "
            + FILLER
            + "The LDA solution with forty themes was retained to identify moral themes "
            "in user posts. We then trained support vector machines to classify posts "
            "as moral or neutral before the main regressions. "
            + FILLER
            + "All text processing relied on the quanteda package, and the remaining "
            "models were estimated in R with default settings. "
            + FILLER
        ),
        "gold": {
            "Q1": ["latent Dirichlet allocation", "support vector machines (SVMs)"],
            "Q2": ["R", "quanteda"],
            "Q3": ["How does moral language in social media posts predict sharing behavior?"],
            "Q4": ["to identify moral themes in user posts", "to classify posts as moral or neutral"],
        },
    },
    {
        "doc_id": "fx002",
        "title": "Personality and prosocial behavior",
        "body": (
            "Our central research question was: Which personality traits predict prosocial "
            "behavior in online communities? A panel of volunteers donated browsing logs. "
            + FILLER
            + "We trained extreme gradient boosting trees to predict prosocial donations "
            "from trait scores, with the tuned XGB setup selected on a validation fold. "
            + FILLER
            + "In parallel, random forest classifiers were used to rank feature importance "
            "across personality measures and to check the stability of the ranking. "
            + FILLER
            + "Modeling was carried out in Python using scikit-learn, with preregistered "
            "hyperparameter grids. "
            + FILLER
        ),
        "gold": {
            "Q1": ["XGBoost", "random forest"],
            "Q2": ["Python", "scikit-learn"],
            "Q3": ["Which personality traits predict prosocial behavior in online communities"],
            "Q4": [
                "to predict prosocial donations from trait scores",
                "to rank feature importance across personality measures",
            ],
        },
    },
    {
        "doc_id": "fx003",
        "title": "Emotions and polarization",
        "body": (
            "We examined the following: How do emotions expressed in text relate to group "
            "polarization? Participants kept daily diaries for six weeks. "
            + FILLER
            + "We used BERT-based sentence encoders to encode diary sentences for "
            "similarity search, and a plain BERT baseline confirmed the retrieval quality. "
            + FILLER
            + "Separately, word2vec embeddings were applied to measure semantic drift in "
            "emotion words across the study period. "
            + FILLER
            + "No dedicated toolkits are named in the methods section of this preprint. "
            + FILLER
        ),
        "gold": {
            "Q1": ["BERT", "word2vec"],
            "Q2": [],
            "Q3": ["How do emotions expressed in text relate to group polarization"],
            "Q4": [
                "to encode diary sentences for similarity search",
                "to measure semantic drift in emotion words",
            ],
        },
    },
    {
        "doc_id": "fx004",
        "title": "Facial expressions and cooperation",
        "body": (
            "The guiding research question was: Can facial expressions in video diaries "
            "reveal cooperative intent? Dyads recorded short clips before a joint task. "
            + FILLER
            + "We applied convolutional neural networks to detect facial action units in "
            "video frames, with the CNNs pretrained on a public corpus. "
            + FILLER
            + "A naive Bayes classifier was then used to label utterances as cooperative "
            "or competitive using the coded transcripts. "
            + FILLER
            + "Video preprocessing and model scoring ran in MATLAB on a shared cluster. "
            + FILLER
        ),
        "gold": {
            "Q1": ["convolutional neural networks", "naive Bayes"],
            "Q2": ["MATLAB"],
            "Q3": ["Can facial expressions in video diaries reveal cooperative intent?"],
            "Q4": [
                "to detect facial action units in video frames",
                "to label utterances as cooperative or competitive",
            ],
        },
    },
    {
        "doc_id": "fx005",
        "title": "Supportive communities",
        "body": (
            "We investigated: What conversational patterns distinguish supportive online "
            "communities? Threads from twelve forums were sampled across two years. "
            + FILLER
            + "We relied on LDA topic models to surface recurring topics in forum threads "
            "before qualitative coding. "
            + FILLER
            + "A random forest was additionally trained to flag supportive replies for "
            "moderation during the field experiment. "
            + FILLER
            + "All statistical follow-ups were computed in SPSS by the second author. "
            + FILLER
        ),
        "gold": {
            "Q1": ["latent Dirichlet allocation", "random forest"],
            "Q2": ["SPSS"],
            "Q3": ["What conversational patterns distinguish supportive online communities"],
            "Q4": [
                "to surface recurring topics in forum threads",
                "to flag supportive replies for moderation",
            ],
        },
    },
]

ALL_MODELS = ["deberta", "albert", "electra", "roberta", "bert"]

# surface, canonical, score, models that can extract it
TECH = [
    ("latent Dirichlet allocation topic models", "latent Dirichlet allocation", 0.95, ["deberta", "albert", "electra"]),
    ("latent Dirichlet allocation", "latent Dirichlet allocation", 0.82, ["deberta", "albert", "electra", "roberta"]),
    ("LDA", "latent Dirichlet allocation", 0.90, ["deberta", "roberta", "bert"]),
    ("topic models", "topic modeling", 0.45, ALL_MODELS),
    ("support vector machines", "support vector machines", 0.88, ["deberta", "albert", "bert"]),
    ("extreme gradient boosting trees", "XGBoost", 0.93, ["deberta", "albert"]),
    ("XGB", "XGBoost", 0.70, ["deberta", "electra", "roberta"]),
    ("random forest classifiers", "random forest", 0.85, ["deberta", "electra"]),
    ("random forest", "random forest", 0.65, ["albert", "roberta", "bert"]),
    ("BERT-based sentence encoders", "BERT", 0.92, ["deberta", "albert"]),
    ("BERT", "BERT", 0.60, ["deberta", "roberta"]),
    ("word2vec embeddings", "word2vec", 0.80, ["deberta", "electra", "roberta"]),
    ("convolutional neural networks", "convolutional neural networks", 0.91, ["deberta", "albert", "roberta"]),
    ("CNNs", "convolutional neural networks", 0.58, ["deberta", "albert"]),
    ("naive Bayes classifier", "naive Bayes", 0.77, ["deberta", "electra", "bert"]),
]

SOFT = [
    ("R", "R", 0.75, ["electra", "roberta", "deberta"]),
    ("the quanteda package", "quanteda", 0.80, ["electra", "albert"]),
    ("Python", "Python", 0.85, ["roberta", "deberta", "electra"]),
    ("scikit-learn", "scikit-learn", 0.90, ["electra", "roberta", "albert"]),
    ("MATLAB", "MATLAB", 0.70, ["electra", "roberta", "bert"]),
    ("SPSS", "SPSS", 0.72, ["roberta", "electra", "deberta"]),
]

RESEARCH_QUESTIONS = [
    ("How does moral language in social media posts predict sharing behavior", ["deberta", "albert", "electra"]),
    ("Which personality traits predict prosocial behavior in online communities", ["deberta", "albert", "roberta"]),
    ("How do emotions expressed in text relate to group polarization", ["deberta", "electra"]),
    ("Can facial expressions in video diaries reveal cooperative intent", ["deberta", "albert", "bert"]),
    ("What conversational patterns distinguish supportive online communities", ["albert", "electra"]),
]

# entity canonical -> purpose surfaces findable for its sub-question;
# high-scoring decoys push the true purpose below topk=1 for two entities,
# and restricted visibility makes the weaker models miss some purposes
PURPOSES = {
    "latent Dirichlet allocation": [
        ("to identify moral themes in user posts", 0.90, None),
        ("to surface recurring topics in forum threads", 0.90, None),
    ],
    "support vector machines": [
        ("to classify posts as moral or neutral", 0.85, ["deberta", "albert", "electra"]),
    ],
    "XGBoost": [
        ("selected on a validation fold", 0.95, None),
        ("to predict prosocial donations from trait scores", 0.90, None),
    ],
    "random forest": [
        ("to rank feature importance across personality measures", 0.85, None),
        ("to flag supportive replies for moderation", 0.85, None),
    ],
    "BERT": [
        ("confirmed the retrieval quality", 0.95, None),
        ("to encode diary sentences for similarity search", 0.90, None),
    ],
    "word2vec": [
        ("to measure semantic drift in emotion words", 0.85, ["deberta", "electra", "roberta"]),
    ],
    "convolutional neural networks": [
        ("to detect facial action units in video frames", 0.90, None),
    ],
    "naive Bayes": [
        ("to label utterances as cooperative or competitive", 0.85, ["deberta", "electra", "bert"]),
    ],
}

# the single-hop baseline only sees one generic purpose per document
BASELINE_PURPOSES = [
    "to identify moral themes in user posts",
    "to predict prosocial donations from trait scores",
    "to encode diary sentences for similarity search",
    "to detect facial action units in video frames",
    "to surface recurring topics in forum threads",
]


def keyword(surface, score, canonical=None, models=None):
    out = {"surface": surface, "score": score}
    if canonical is not None and canonical != surface:
        out["canonical"] = canonical
    if models:
        out["models"] = list(models)
    return out


def build_table() -> dict:
    entries = []
    entries.append(
        {
            "selector": "techniques were used",
            "keywords": [keyword(s, sc, c, m) for s, c, sc, m in TECH],
        }
    )
    entries.append(
        {
            "selector": "software was used",
            "keywords": [keyword(s, sc, c, m) for s, c, sc, m in SOFT],
        }
    )
    entries.append(
        {
            "selector": "research question",
            "keywords": [keyword(s, 0.9, None, m) for s, m in RESEARCH_QUESTIONS],
        }
    )
    entries.append(
        {
            "selector": "techniques used for",
            "keywords": [keyword(s, 0.5) for s in BASELINE_PURPOSES],
        }
    )
    for entity, purposes in sorted(PURPOSES.items()):
        entries.append(
            {
                "selector": f"{entity} used for",
                "keywords": [keyword(s, sc, None, m) for s, sc, m in purposes],
            }
        )
    # generation-side selectors match the prompt templates; visible to all models
    entries.append(
        {
            "selector": "technique mentioned in the evidence",
            "keywords": [keyword(s, 0.5, c) for s, c, _, _ in TECH],
        }
    )
    entries.append(
        {
            "selector": "software tool used for machine learning",
            "keywords": [keyword(s, 0.5, c) for s, c, _, _ in SOFT],
        }
    )
    return {"entries": entries, "embedding_dim": 64}


MOCK_CONFIG = """\
# Offline harness configuration: deterministic mock backends.
workers: 1
run_root: runs
backends:
  extractive:
    - {model_id: deberta, endpoint: "mock://extractive", params: {seed: 11, table: ../fixture_corpus/mock_table.json}}
    - {model_id: albert, endpoint: "mock://extractive", params: {seed: 12, table: ../fixture_corpus/mock_table.json}}
    - {model_id: electra, endpoint: "mock://extractive", params: {seed: 13, table: ../fixture_corpus/mock_table.json}}
    - {model_id: roberta, endpoint: "mock://extractive", params: {seed: 14, table: ../fixture_corpus/mock_table.json}}
    - {model_id: bert, endpoint: "mock://extractive", params: {seed: 15, table: ../fixture_corpus/mock_table.json}}
  generative:
    {model_id: llama3, endpoint: "mock://generate", params: {seed: 99, table: ../fixture_corpus/mock_table.json}}
  embedding:
    {model_id: e5-mock, endpoint: "mock://embed", params: {seed: 101, table: ../fixture_corpus/mock_table.json}}
ensemble:
  Q1: {members: [deberta, albert]}
  Q2: {members: [electra, roberta]}
  Q3: {members: [deberta, albert]}
metrics:
  tau: 0.8
q4:
  topk_per_sub: [1, 3, 5]
"""

REPLAY_CONFIG = """\
# Re-scores the shipped fixture run without any model computation.
workers: 1
run_root: runs
backends:
  extractive:
    - {model_id: deberta, endpoint: "replay://../replay/fixtures.jsonl"}
    - {model_id: albert, endpoint: "replay://../replay/fixtures.jsonl"}
    - {model_id: electra, endpoint: "replay://../replay/fixtures.jsonl"}
    - {model_id: roberta, endpoint: "replay://../replay/fixtures.jsonl"}
    - {model_id: bert, endpoint: "replay://../replay/fixtures.jsonl"}
  generative:
    {model_id: llama3, endpoint: "replay://../replay/fixtures.jsonl"}
  embedding:
    {model_id: e5-mock, endpoint: "replay://../replay/fixtures.jsonl"}
ensemble:
  Q1: {members: [deberta, albert]}
  Q2: {members: [electra, roberta]}
  Q3: {members: [deberta, albert]}
metrics:
  tau: 0.8
q4:
  topk_per_sub: [1, 3, 5]
"""


def main() -> int:
    corpus_dir = DATA / "fixture_corpus"
    configs_dir = DATA / "configs"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    configs_dir.mkdir(parents=True, exist_ok=True)

    with (corpus_dir / "documents.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for doc in DOCS:
            row = {
                "doc_id": doc["doc_id"],
                "text": doc["body"],
                "meta": {"title": doc["title"], "year": "2024", "source": "fixture"},
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    with (corpus_dir / "gold.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for doc in DOCS:
            for qid in ("Q1", "Q2", "Q3", "Q4"):
                row = {"doc_id": doc["doc_id"], "qid": qid, "gold_answers": doc["gold"][qid]}
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    sys.path.insert(0, str(ROOT / "src"))
    from docpipe.types import default_question_specs

    specs = [spec.as_dict() for spec in default_question_specs().values()]
    (corpus_dir / "questions.json").write_text(
        json.dumps(specs, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    (corpus_dir / "mock_table.json").write_text(
        json.dumps(build_table(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )

    (configs_dir / "mock.yaml").write_text(MOCK_CONFIG, encoding="utf-8")
    (configs_dir / "replay.yaml").write_text(REPLAY_CONFIG, encoding="utf-8")

    for doc in DOCS:
        assert len(doc["body"]) > 2500, doc["doc_id"]
    print(f"wrote fixture corpus ({len(DOCS)} docs) to {corpus_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
