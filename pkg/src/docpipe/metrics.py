"""The four metrics and their document/corpus aggregation.

Exact Match, Similar Match, and Mentions score a document as the ratio of
matched gold answers; F1 averages, over gold answers, the best token-overlap
F1 across all predictions. Negative samples (empty gold) score 1.0 when the
prediction is empty and 0.0 otherwise, on all four metrics.
"""

from __future__ import annotations

import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .protocol.client import BackendClient
from .refine import squad_normalize
from .types import AnswerSet, GoldAnnotation, QId

METRIC_NAMES = ("f1", "em", "smat", "mentions")


@dataclass(frozen=True)
class MetricConfig:
    smat_threshold: float = 0.80
    mentions_case_sensitive: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.smat_threshold <= 1.0):
            raise ValueError(f"smat_threshold must be in (0, 1], got {self.smat_threshold}")


def _tokens(text: str) -> list[str]:
    return squad_normalize(text).split()


def f1_token(gold: str, pred: str) -> float:
    """Token-multiset F1 after normalization. Both empty scores 1.0."""
    gold_tokens = _tokens(gold)
    pred_tokens = _tokens(pred)
    if not gold_tokens and not pred_tokens:
        return 1.0
    common = sum((Counter(gold_tokens) & Counter(pred_tokens)).values())
    if common == 0:
        return 0.0
    precision = common / len(pred_tokens)
    recall = common / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def exact_match(gold: str, pred: str) -> bool:
    return squad_normalize(gold) == squad_normalize(pred)


_PAREN_SUFFIX = re.compile(r"^(?P<head>.+?)\s*\((?P<inner>[^()]+)\)\s*$")


def mentions_match(gold: str, preds: list[str], cfg: MetricConfig) -> bool:
    """Substring presence of the gold answer inside any prediction, extended by
    (a) decomposition of a trailing parenthesized suffix into its two parts,
    matched by equality, and (b) whitespace-removed containment."""

    def fold(s: str) -> str:
        return s if cfg.mentions_case_sensitive else s.lower()

    g = fold(gold)
    parts: list[str] = []
    m = _PAREN_SUFFIX.match(gold)
    if m:
        parts = [fold(m.group("head").strip()), fold(m.group("inner").strip())]
    g_squeezed = "".join(g.split())
    for pred in preds:
        p = fold(pred)
        if g in p:
            return True
        if parts and p.strip() in parts:
            return True
        if g_squeezed and g_squeezed in "".join(p.split()):
            return True
    return False


class Embedder:
    """Caches embeddings by exact string within a run. Thread-safe."""

    def __init__(self, client: BackendClient, preload: dict[str, list[float]] | None = None):
        self.client = client
        self._cache: dict[str, np.ndarray] = {
            k: np.asarray(v, dtype=float) for k, v in (preload or {}).items()
        }
        self._lock = threading.Lock()

    def vectors(self, texts: list[str]) -> list[np.ndarray]:
        with self._lock:
            missing = [t for t in dict.fromkeys(texts) if t not in self._cache]
        if missing:
            fetched = self.client.embed(missing)
            with self._lock:
                for text, vec in zip(missing, fetched):
                    self._cache[text] = np.asarray(vec.values, dtype=float)
        with self._lock:
            return [self._cache[t] for t in texts]

    def cache_snapshot(self) -> dict[str, list[float]]:
        with self._lock:
            return {k: [float(x) for x in v] for k, v in sorted(self._cache.items())}


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b) / denom)


def similar_match(gold: str, preds: list[str], embedder: Embedder, threshold: float) -> bool:
    """True when any prediction's embedding reaches the cosine threshold."""
    if not preds:
        return False
    vecs = embedder.vectors([gold] + list(preds))
    gold_vec = vecs[0]
    return any(cosine(gold_vec, v) >= threshold for v in vecs[1:])


@dataclass(frozen=True)
class DocScores:
    f1: float
    em: float
    smat: float
    mentions: float

    def as_dict(self) -> dict[str, float]:
        return {"f1": self.f1, "em": self.em, "smat": self.smat, "mentions": self.mentions}

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "DocScores":
        return cls(f1=d["f1"], em=d["em"], smat=d["smat"], mentions=d["mentions"])


def score_document(
    gold: GoldAnnotation,
    preds: AnswerSet,
    cfg: MetricConfig,
    embedder: Embedder,
) -> DocScores:
    if gold.qid is not preds.qid:
        raise ValueError(f"gold qid {gold.qid.value} != prediction qid {preds.qid.value}")
    pred_list = list(preds.answers)
    if not gold.gold_answers:
        value = 1.0 if not pred_list else 0.0
        return DocScores(f1=value, em=value, smat=value, mentions=value)

    n = len(gold.gold_answers)
    em_hits = sum(1 for g in gold.gold_answers if any(exact_match(g, p) for p in pred_list))
    mention_hits = sum(1 for g in gold.gold_answers if mentions_match(g, pred_list, cfg))
    smat_hits = sum(
        1
        for g in gold.gold_answers
        if similar_match(g, pred_list, embedder, cfg.smat_threshold)
    )
    f1_sum = sum(max((f1_token(g, p) for p in pred_list), default=0.0) for g in gold.gold_answers)
    return DocScores(
        f1=f1_sum / n,
        em=em_hits / n,
        smat=smat_hits / n,
        mentions=mention_hits / n,
    )


@dataclass
class MetricReport:
    """Per-document and corpus-averaged scores keyed by (doc_id, qid, system label)."""

    per_doc: dict[tuple[str, str, str], DocScores] = field(default_factory=dict)
    corpus: dict[tuple[str, str], DocScores] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "per_doc": {
                f"{doc_id}\t{qid}\t{label}": scores.as_dict()
                for (doc_id, qid, label), scores in sorted(self.per_doc.items())
            },
            "corpus": {
                f"{qid}\t{label}": scores.as_dict()
                for (qid, label), scores in sorted(self.corpus.items())
            },
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MetricReport":
        per_doc = {}
        for key, scores in d.get("per_doc", {}).items():
            doc_id, qid, label = key.split("\t")
            per_doc[(doc_id, qid, label)] = DocScores.from_dict(scores)
        corpus = {}
        for key, scores in d.get("corpus", {}).items():
            qid, label = key.split("\t")
            corpus[(qid, label)] = DocScores.from_dict(scores)
        return cls(per_doc=per_doc, corpus=corpus, metadata=d.get("metadata", {}))


def aggregate(
    per_doc: dict[tuple[str, str, str], DocScores],
    metadata: dict[str, Any] | None = None,
) -> MetricReport:
    """Arithmetic mean of per-document scores per (qid, system label)."""
    if not per_doc:
        raise ValueError("nothing to aggregate")
    groups: dict[tuple[str, str], list[DocScores]] = {}
    for (doc_id, qid, label), scores in per_doc.items():
        groups.setdefault((qid, label), []).append(scores)
    corpus = {
        key: DocScores(
            f1=sum(s.f1 for s in scores) / len(scores),
            em=sum(s.em for s in scores) / len(scores),
            smat=sum(s.smat for s in scores) / len(scores),
            mentions=sum(s.mentions for s in scores) / len(scores),
        )
        for key, scores in groups.items()
    }
    return MetricReport(per_doc=dict(per_doc), corpus=corpus, metadata=dict(metadata or {}))
