"""Corpus directory loading, writing, and answer-set validation.

Directory layout: documents.jsonl ({"doc_id","text","meta"} per line),
gold.jsonl ({"doc_id","qid","gold_answers"} per line), questions.json
(list of question specs). UTF-8, LF line endings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusValidationError
from .refine import squad_normalize
from .types import (
    AnswerSet,
    Corpus,
    Document,
    GoldAnnotation,
    QId,
    QuestionSpec,
    default_question_specs,
)

CORPUS_FILES = ("documents.jsonl", "gold.jsonl", "questions.json")


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    with path.open(encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CorpusValidationError(f"{path.name}:{i}: invalid JSON ({exc})") from exc
    return rows


def load_corpus(path: str | Path, require_fully_annotated: bool = False) -> Corpus:
    """Load and validate a corpus directory. Raises on missing files or
    invariant violations, naming the offending doc_id/qid."""
    root = Path(path)
    for name in ("documents.jsonl", "gold.jsonl"):
        if not (root / name).exists():
            raise CorpusValidationError(f"missing corpus file: {root / name}")

    documents = []
    seen_ids: set[str] = set()
    for row in _read_jsonl(root / "documents.jsonl"):
        doc = Document.from_dict(row)
        if doc.doc_id in seen_ids:
            raise CorpusValidationError(f"duplicate doc_id {doc.doc_id!r}")
        seen_ids.add(doc.doc_id)
        documents.append(doc)

    questions_path = root / "questions.json"
    if questions_path.exists():
        specs_list = json.loads(questions_path.read_text(encoding="utf-8"))
        question_specs = {}
        for d in specs_list:
            spec = QuestionSpec.from_dict(d)
            question_specs[spec.qid] = spec
    else:
        question_specs = default_question_specs()

    gold: dict[tuple[str, QId], GoldAnnotation] = {}
    for row in _read_jsonl(root / "gold.jsonl"):
        ann = GoldAnnotation.from_dict(row)
        if ann.doc_id not in seen_ids:
            raise CorpusValidationError(
                f"gold record references unknown doc_id {ann.doc_id!r} (qid {ann.qid.value})"
            )
        if (ann.doc_id, ann.qid) in gold:
            raise CorpusValidationError(f"duplicate gold record for ({ann.doc_id!r}, {ann.qid.value})")
        if len(set(ann.gold_answers)) != len(ann.gold_answers):
            raise CorpusValidationError(f"duplicate gold strings for ({ann.doc_id!r}, {ann.qid.value})")
        spec = question_specs.get(ann.qid)
        if not ann.gold_answers and (spec is None or not spec.nullable):
            raise CorpusValidationError(
                f"empty gold_answers for non-nullable question ({ann.doc_id!r}, {ann.qid.value})"
            )
        gold[(ann.doc_id, ann.qid)] = ann

    if require_fully_annotated:
        missing = [
            (doc.doc_id, qid.value)
            for doc in documents
            for qid in question_specs
            if (doc.doc_id, qid) not in gold
        ]
        if missing:
            raise CorpusValidationError(f"corpus not fully annotated; missing gold for {missing[:5]}")

    return Corpus(documents=tuple(documents), gold=gold, question_specs=question_specs)


def write_corpus(corpus: Corpus, path: str | Path) -> Path:
    """Write a corpus directory in the canonical layout. Round-trips with load_corpus."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "documents.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps(doc.as_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    with (root / "gold.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(corpus.gold, key=lambda k: (k[0], k[1].value)):
            fh.write(json.dumps(corpus.gold[key].as_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    specs = [corpus.question_specs[qid].as_dict() for qid in sorted(corpus.question_specs, key=lambda q: q.value)]
    (root / "questions.json").write_text(
        json.dumps(specs, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8", newline="\n"
    )
    return root


def corpus_digest(path: str | Path) -> str:
    """Stable digest over the corpus directory's canonical files."""
    root = Path(path)
    h = hashlib.sha256()
    for name in CORPUS_FILES:
        p = root / name
        h.update(name.encode())
        h.update(p.read_bytes() if p.exists() else b"<absent>")
    return h.hexdigest()


@dataclass
class Finding:
    kind: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, kind: str, message: str) -> None:
        self.findings.append(Finding(kind, message))


def validate_answer_set(answer_set: AnswerSet, corpus: Corpus) -> ValidationReport:
    """Report duplicate answers, empty-answer violations for non-nullable
    questions, and provenance spans that no longer slice their document."""
    report = ValidationReport()
    seen: dict[str, str] = {}
    for ans in answer_set.answers:
        key = squad_normalize(ans)
        if key in seen:
            report.add("duplicate", f"{ans!r} duplicates {seen[key]!r} after normalization")
        else:
            seen[key] = ans

    spec = corpus.question_specs.get(answer_set.qid)
    if answer_set.is_empty and spec is not None and not spec.nullable:
        report.add(
            "non-nullable-empty",
            f"{answer_set.qid.value} produced no answers for {answer_set.doc_id!r}",
        )

    try:
        doc = corpus.document(answer_set.doc_id)
    except KeyError:
        report.add("unknown-document", f"doc_id {answer_set.doc_id!r} not in corpus")
        return report
    for i, prov in enumerate(answer_set.provenance):
        for span in prov.spans:
            if span.end > len(doc.text) or doc.text[span.start : span.end] != span.text:
                report.add(
                    "dangling-provenance",
                    f"answer {i} span [{span.start}, {span.end}) does not slice {doc.doc_id!r}",
                )
    return report
