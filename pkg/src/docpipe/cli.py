"""Command-line surface: run pipelines, evaluate, sweep pairs, emit reports,
and serve mock/replay backends over HTTP."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import CONFIG_ENV_VAR, load_config
from .corpus import load_corpus
from .errors import DocpipeError
from .jsonio import read_json, write_json
from .metrics import MetricReport
from .pipeline import PipelineRunner, Run, evaluate_run, resume_run, sweep_ensemble_pairs
from .protocol.replay import FixtureRecorder
from .rag import KIND_BY_QID
from .reporting import emit_descriptives, emit_tables
from .types import QId

_QID_CHOICES = [q.value for q in QId] + ["all"]


@click.group()
def cli() -> None:
    """Question-answering pipeline engine and evaluation harness."""


@cli.command("run")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--qid", "qids", multiple=True, type=click.Choice(_QID_CHOICES), default=("all",))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help=f"Config file (falls back to ${CONFIG_ENV_VAR}).")
@click.option("--out", "run_dir", type=click.Path(file_okay=False), default=None,
              help="Run directory (default: <run_root>/<run_id>).")
@click.option("--keep-going", is_flag=True, help="Record per-document failures and continue.")
@click.option("--record", "record_path", type=click.Path(dir_okay=False), default=None,
              help="Append every backend request/response to a replay fixture file.")
@click.option("--timestamps", is_flag=True,
              help="Write wall-clock timestamps into the manifest (breaks byte-identical reruns).")
def run_cmd(corpus_dir, qids, config_path, run_dir, keep_going, record_path, timestamps) -> None:
    """Run question pipelines over a corpus, persisting all intermediates."""
    corpus = load_corpus(corpus_dir)
    config = load_config(config_path, base_specs=corpus.question_specs)
    run = Run.create_or_resume(corpus_dir, config, run_dir=run_dir, timestamps=timestamps)
    recorder = FixtureRecorder(record_path) if record_path else None
    runner = PipelineRunner(corpus, config, run, recorder=recorder, keep_going=keep_going)
    wanted = list(QId) if "all" in qids else [QId(q) for q in qids]
    if QId.Q4 in wanted and QId.Q1 in wanted:  # dependency order
        wanted = sorted(wanted, key=lambda q: (q is QId.Q4, q.value))
    try:
        for qid in wanted:
            runner.run_question(qid)
            click.echo(f"{qid.value}: done")
    finally:
        runner.close()
    click.echo(f"run directory: {run.run_dir}")


@cli.command("eval")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tau", type=float, default=None, help="Similar Match cosine threshold.")
@click.option("--mentions-ignore-case", is_flag=True, default=None)
def eval_cmd(run_dir, tau, mentions_ignore_case) -> None:
    """Score every persisted system against gold; write eval/report.json and tables."""
    runner = resume_run(run_dir)
    try:
        report = evaluate_run(runner, tau=tau, mentions_ignore_case=mentions_ignore_case)
    finally:
        runner.close()
    _write_tables(Path(run_dir), report)


def _write_tables(run_dir: Path, report: MetricReport) -> None:
    tables = emit_tables(report)
    for qid, text in tables.items():
        path = run_dir / "eval" / "tables" / f"{qid}.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        click.echo(text)


@cli.command("sweep")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--qid", required=True, type=click.Choice([q.value for q in QId]))
@click.option("--tau", type=float, default=None)
def sweep_cmd(run_dir, qid, tau) -> None:
    """Score every model pair's combined answers; rank by SMat then F1."""
    runner = resume_run(run_dir)
    try:
        ranking = sweep_ensemble_pairs(runner, QId(qid), tau=tau)
    finally:
        runner.close()
    write_json(Path(run_dir) / "eval" / f"sweep_{qid}.json", ranking)
    for i, row in enumerate(ranking, start=1):
        click.echo(
            f"{i}. {row['pair'][0]} + {row['pair'][1]}  "
            f"smat={row['smat']:.3f} f1={row['f1']:.3f} em={row['em']:.3f} ment={row['mentions']:.3f}"
        )


@cli.command("report")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True, file_okay=False))
def report_cmd(run_dir) -> None:
    """Re-emit tables and descriptive statistics from persisted eval output."""
    run_path = Path(run_dir)
    report_path = run_path / "eval" / "report.json"
    if not report_path.exists():
        raise DocpipeError(f"no eval report under {run_path}; run `docpipe eval` first")
    report = MetricReport.from_dict(read_json(report_path))
    _write_tables(run_path, report)

    runner = resume_run(run_dir)
    try:
        for qid in QId:
            systems = runner.load_final_sets(qid)
            if not systems:
                continue
            gold = {
                doc_id: ann
                for (doc_id, gqid), ann in runner.corpus.gold.items()
                if gqid is qid
            }
            if not gold:
                continue
            spec = runner.config.question_specs[qid]
            text, _ = emit_descriptives(qid, gold, systems, nullable=spec.nullable)
            path = run_path / "eval" / "tables" / f"{qid}_descriptives.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8", newline="\n")
            click.echo(text)
    finally:
        runner.close()


@cli.command("descriptives")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--qid", "qids", multiple=True, type=click.Choice(_QID_CHOICES), default=("all",))
def descriptives_cmd(corpus_dir, qids) -> None:
    """Descriptive statistics of the gold answers in a corpus."""
    corpus = load_corpus(corpus_dir)
    wanted = list(QId) if "all" in qids else [QId(q) for q in qids]
    for qid in wanted:
        gold = {doc_id: ann for (doc_id, gqid), ann in corpus.gold.items() if gqid is qid}
        if not gold:
            click.echo(f"{qid.value}: no gold annotations")
            continue
        spec = corpus.question_specs[qid]
        text, _ = emit_descriptives(qid, gold, nullable=spec.nullable)
        click.echo(text)


@cli.command("validate")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--fully-annotated", is_flag=True, help="Require gold for every (document, question).")
def validate_cmd(corpus_dir, fully_annotated) -> None:
    """Load a corpus and report whether it satisfies all invariants."""
    corpus = load_corpus(corpus_dir, require_fully_annotated=fully_annotated)
    click.echo(f"ok: {len(corpus.documents)} documents, {len(corpus.gold)} gold records")


@cli.command("serve-mock")
@click.option("--model-id", default="mock")
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
def serve_mock_cmd(model_id, table_path, seed, host, port) -> None:
    """Serve the deterministic mock backend over HTTP."""
    import uvicorn

    from .protocol.mock import mock_backend_from_params
    from .protocol.server import build_app

    params = {"seed": seed}
    if table_path:
        params["table"] = table_path
    app = build_app(mock_backend_from_params(model_id, params), model_id)
    uvicorn.run(app, host=host, port=port)


@cli.command("serve-replay")
@click.option("--fixtures", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model-id", default="replay")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
def serve_replay_cmd(fixtures, model_id, host, port) -> None:
    """Serve stored responses from a replay fixture file over HTTP."""
    import uvicorn

    from .protocol.replay import ReplayBackend, ReplayStore
    from .protocol.server import build_app

    backend = ReplayBackend(ReplayStore.load(fixtures), model_id)
    uvicorn.run(build_app(backend, model_id), host=host, port=port)


def main() -> None:
    try:
        cli(standalone_mode=False)
    except DocpipeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(130)


if __name__ == "__main__":
    main()
