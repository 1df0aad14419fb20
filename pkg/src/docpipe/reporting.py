"""Result tables and descriptive statistics, aligned text plus JSON.

Numeric cells display three decimals; the machine-readable files keep full
precision. Re-emission from the same report is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metrics import MetricReport
from .types import AnswerSet, GoldAnnotation, QId

_SECTION_ORDER = ("raw", "rag", "single_hop", "multihop")


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.3f}"


def _render_rows(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _split_label(label: str) -> tuple[str, str]:
    if "/" in label:
        section, model = label.split("/", 1)
        return section, model
    return ("combined", label)


def _label_sort_key(label: str) -> tuple[int, str]:
    section, _ = _split_label(label)
    base = section.split(".k")[0]
    try:
        rank = _SECTION_ORDER.index(base)
    except ValueError:
        rank = len(_SECTION_ORDER)
    return (rank, label)


def emit_tables(report: MetricReport) -> dict[str, str]:
    """One aligned text table per question id present in the report."""
    by_qid: dict[str, dict[str, dict]] = {}
    for (qid, label), scores in report.corpus.items():
        by_qid.setdefault(qid, {})[label] = scores.as_dict()

    tables: dict[str, str] = {}
    for qid in (q.value for q in QId):
        rows_by_label = by_qid.get(qid)
        if not rows_by_label:
            tables[qid] = f"{qid}: no scored systems\n"
            continue
        if qid == QId.Q4.value:
            tables[qid] = _q4_table(qid, rows_by_label, report.metadata)
        else:
            headers = ["system", "F1", "EMat", "SMat", "Ment"]
            rows = []
            for label in sorted(rows_by_label, key=_label_sort_key):
                s = rows_by_label[label]
                rows.append([label, _fmt(s["f1"]), _fmt(s["em"]), _fmt(s["smat"]), _fmt(s["mentions"])])
            tables[qid] = f"{qid}\n" + _render_rows(headers, rows)
    return tables


def _q4_table(qid: str, rows_by_label: dict[str, dict], metadata: dict) -> str:
    topks = [int(k) for k in metadata.get("q4_topk_per_sub", [1, 3, 5])]
    headers = ["system", "F1", "EMat"] + [f"SMat k={k}" for k in topks]

    singles: dict[str, dict] = {}
    multis: dict[str, dict[int, dict]] = {}
    for label, scores in rows_by_label.items():
        section, model = _split_label(label)
        if section == "single_hop":
            singles[model] = scores
        elif section.startswith("multihop.k"):
            k = int(section[len("multihop.k") :])
            multis.setdefault(model, {})[k] = scores

    rows = []
    for model in sorted(singles):
        s = singles[model]
        cells = [f"single_hop/{model}", _fmt(s["f1"]), _fmt(s["em"]), _fmt(s["smat"])]
        cells += ["-"] * (len(topks) - 1)
        rows.append(cells)
    for model in sorted(multis):
        by_k = multis[model]
        first_k = topks[0] if topks and topks[0] in by_k else min(by_k)
        head = by_k[first_k]
        cells = [f"multihop/{model}", _fmt(head["f1"]), _fmt(head["em"])]
        cells += [_fmt(by_k[k]["smat"]) if k in by_k else "-" for k in topks]
        rows.append(cells)
    note = "single_hop rows report SMat from the top-10 baseline; multihop F1/EMat use the smallest topk.\n"
    return f"{qid}\n" + _render_rows(headers, rows) + note


@dataclass(frozen=True)
class DescriptiveRow:
    label: str
    docs: int
    mean_spans: float | None  # over documents with at least one answer
    mean_total_words: float | None  # over all documents, summing every answer
    mean_words_per_span: float | None
    pct_empty: float


def descriptive_stats(label: str, answer_lists: list[list[str]]) -> DescriptiveRow:
    nonempty = [answers for answers in answer_lists if answers]
    pct_empty = 100.0 * (len(answer_lists) - len(nonempty)) / len(answer_lists) if answer_lists else 0.0
    if not nonempty:
        return DescriptiveRow(label, len(answer_lists), None, None, None, pct_empty)
    mean_spans = sum(len(a) for a in nonempty) / len(nonempty)
    mean_total_words = sum(
        sum(len(ans.split()) for ans in answers) for answers in answer_lists
    ) / len(answer_lists)
    ratios = [sum(len(ans.split()) for ans in answers) / len(answers) for answers in nonempty]
    return DescriptiveRow(
        label, len(answer_lists), mean_spans, mean_total_words, sum(ratios) / len(ratios), pct_empty
    )


def emit_descriptives(
    qid: QId,
    gold_by_doc: dict[str, GoldAnnotation],
    systems: dict[str, dict[str, AnswerSet]] | None = None,
    nullable: bool = False,
) -> tuple[str, list[DescriptiveRow]]:
    """Span-count / words-per-span / percent-empty table, gold row first.

    Means exclude documents with zero answers; %Empty is over all documents
    and only shown for nullable questions.
    """
    doc_ids = sorted(gold_by_doc)
    rows = [descriptive_stats("gold", [list(gold_by_doc[d].gold_answers) for d in doc_ids])]
    for label in sorted(systems or {}):
        by_doc = (systems or {})[label]
        lists = [list(by_doc[d].answers) for d in doc_ids if d in by_doc]
        if lists:
            rows.append(descriptive_stats(label, lists))

    headers = ["system", "# Spans", "# Words", "# Words per Span"]
    if nullable:
        headers.append("% Empty")
    table_rows = []
    for row in rows:
        cells = [
            row.label,
            _fmt(row.mean_spans),
            _fmt(row.mean_total_words),
            _fmt(row.mean_words_per_span),
        ]
        if nullable:
            cells.append(f"{row.pct_empty:.0f}")
        table_rows.append(cells)
    return f"{qid.value} answer statistics\n" + _render_rows(headers, table_rows), rows
