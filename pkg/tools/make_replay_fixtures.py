#!/usr/bin/env python3
"""Record the shipped replay fixture set and golden metric report.

Runs the full mock-backend pipeline over the fixture corpus with a recorder
attached (including eval-time embedding calls), then freezes the resulting
report. The recorded fixtures let `docpipe run/eval` reproduce the report
byte-for-byte with zero model computation.
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from docpipe.config import load_config
from docpipe.corpus import load_corpus
from docpipe.jsonio import write_json
from docpipe.pipeline import PipelineRunner, Run, evaluate_run
from docpipe.protocol.replay import FixtureRecorder
from docpipe.types import QId


def main() -> int:
    corpus_dir = ROOT / "data" / "fixture_corpus"
    fixtures_path = ROOT / "data" / "replay" / "fixtures.jsonl"
    golden_path = ROOT / "data" / "golden" / "metric_report.json"

    fixtures_path.parent.mkdir(parents=True, exist_ok=True)
    if fixtures_path.exists():
        fixtures_path.unlink()

    corpus = load_corpus(corpus_dir)
    config = load_config(ROOT / "data" / "configs" / "mock.yaml", base_specs=corpus.question_specs)
    recorder = FixtureRecorder(fixtures_path)

    tmp = Path(tempfile.mkdtemp(prefix="docpipe-record-"))
    try:
        run = Run.create_or_resume(corpus_dir, config, run_dir=tmp / "run")
        runner = PipelineRunner(corpus, config, run, recorder=recorder)
        for qid in QId:
            runner.run_question(qid)
        report = evaluate_run(runner)
        runner.close()
        write_json(golden_path, report.as_dict())
    finally:
        shutil.rmtree(tmp, ignore_errors=True)

    n_lines = len(fixtures_path.read_text(encoding="utf-8").splitlines())
    print(f"wrote {n_lines} fixture lines to {fixtures_path}")
    print(f"wrote golden report to {golden_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
