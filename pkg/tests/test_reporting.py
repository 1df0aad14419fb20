from pathlib import Path

import pytest

from docpipe.jsonio import read_json
from docpipe.metrics import DocScores, MetricReport, aggregate
from docpipe.reporting import descriptive_stats, emit_descriptives, emit_tables
from docpipe.types import AnswerSet, GoldAnnotation, QId

ROOT = Path(__file__).resolve().parent.parent


def _report():
    per_doc = {}
    for doc in ("d1", "d2"):
        per_doc[(doc, "Q1", "raw/deberta")] = DocScores(f1=0.5, em=0.25, smat=0.75, mentions=0.5)
        per_doc[(doc, "Q1", "rag/deberta")] = DocScores(f1=0.75, em=0.5, smat=1.0, mentions=0.5)
        per_doc[(doc, "Q1", "Combined")] = DocScores(f1=1.0, em=0.5, smat=1.0, mentions=1.0)
        per_doc[(doc, "Q4", "single_hop/deberta")] = DocScores(f1=0.3, em=0.1, smat=0.4, mentions=0.2)
        for k in (1, 3, 5):
            per_doc[(doc, "Q4", f"multihop.k{k}/deberta")] = DocScores(
                f1=0.5, em=0.2, smat=0.4 + 0.1 * k, mentions=0.3
            )
    return aggregate(per_doc, metadata={"tau": 0.8, "q4_topk_per_sub": [1, 3, 5]})


def test_tables_have_metric_columns_and_sections():
    tables = emit_tables(_report())
    q1 = tables["Q1"]
    assert "F1" in q1 and "EMat" in q1 and "SMat" in q1 and "Ment" in q1
    # raw section sorts before rag, Combined last
    assert q1.index("raw/deberta") < q1.index("rag/deberta") < q1.index("Combined")
    assert "0.750" in q1  # three-decimal display


def test_q4_table_carries_topk_columns():
    q4 = emit_tables(_report())["Q4"]
    assert "SMat k=1" in q4 and "SMat k=3" in q4 and "SMat k=5" in q4
    assert "single_hop/deberta" in q4
    assert "multihop/deberta" in q4
    row = next(line for line in q4.splitlines() if line.startswith("multihop/deberta"))
    assert "0.500" in row and "0.700" in row and "0.900" in row


def test_empty_qid_section_notice():
    tables = emit_tables(_report())
    assert tables["Q2"] == "Q2: no scored systems\n"


def test_emission_is_pure_function_of_report():
    report = _report()
    clone = MetricReport.from_dict(report.as_dict())
    assert emit_tables(report) == emit_tables(clone)


def test_text_cells_match_machine_values_to_3_decimals():
    report = _report()
    tables = emit_tables(report)
    for (qid, label), scores in report.corpus.items():
        if qid == "Q4":
            continue
        row = next(line for line in tables[qid].splitlines() if line.startswith(label))
        cells = row.split()[-4:]
        assert cells == [
            f"{scores.f1:.3f}", f"{scores.em:.3f}", f"{scores.smat:.3f}", f"{scores.mentions:.3f}"
        ]


def test_descriptive_stats_rules():
    row = descriptive_stats("sys", [["a b", "c"], [], ["one two three"]])
    assert row.pct_empty == pytest.approx(100 / 3)
    # means exclude the empty document
    assert row.mean_spans == pytest.approx(1.5)
    assert row.mean_words_per_span == pytest.approx((1.5 + 3.0) / 2)
    assert row.mean_total_words == pytest.approx((3 + 0 + 3) / 3)

    empty = descriptive_stats("sys", [[], []])
    assert empty.pct_empty == 100.0
    assert empty.mean_spans is None


def test_emit_descriptives_gold_row_first():
    gold = {
        "d1": GoldAnnotation(doc_id="d1", qid=QId.Q2, gold_answers=("R",)),
        "d2": GoldAnnotation(doc_id="d2", qid=QId.Q2, gold_answers=()),
    }
    systems = {
        "rag/m": {
            "d1": AnswerSet(doc_id="d1", qid=QId.Q2, answers=("R", "SPSS")),
            "d2": AnswerSet(doc_id="d2", qid=QId.Q2, answers=(), empty_means_unanswerable=True),
        }
    }
    text, rows = emit_descriptives(QId.Q2, gold, systems, nullable=True)
    assert rows[0].label == "gold"
    assert rows[0].pct_empty == 50.0
    assert rows[1].label == "rag/m"
    assert "% Empty" in text


def test_mlpsych_gold_reproduces_published_statistics():
    corpus_dir = ROOT / "data" / "mlpsych"
    gold_rows = {}
    import json

    with (corpus_dir / "gold.jsonl").open() as fh:
        for line in fh:
            row = json.loads(line)
            gold_rows.setdefault(row["qid"], []).append(row["gold_answers"])

    q1 = descriptive_stats("gold", gold_rows["Q1"])
    assert q1.mean_spans == pytest.approx(2.78, abs=0.01)
    assert q1.mean_spans == pytest.approx(2.788, abs=0.01)
    assert q1.mean_total_words == pytest.approx(7.56, abs=0.01)
    assert q1.mean_words_per_span == pytest.approx(2.998, abs=0.01)

    q3 = descriptive_stats("gold", gold_rows["Q3"])
    assert q3.mean_total_words == pytest.approx(26.00, abs=0.01)

    q2 = descriptive_stats("gold", gold_rows["Q2"])
    assert round(q2.pct_empty) == 33
    assert q2.mean_spans == pytest.approx(1.829, abs=0.01)
