"""Run orchestration: wire the stages per question, process every document,
persist intermediates, resume safely, and re-score without backend calls.

Run directory layout:
  manifest.json
  stages/<qid>/<stage>/<doc_id>.json
  stages/<qid>/final/<doc_id>.json   (system label -> answer set)
  eval/report.json, eval/embedding_cache.json, eval/tables/<qid>.txt
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import itertools
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable
from urllib.parse import quote

from .config import PipelineConfig
from .corpus import corpus_digest, load_corpus
from .ensemble import combine
from .errors import ConfigError, StageError, StaleRunError
from .extraction import ExtractionOutcome, answer_question
from .jsonio import read_json, write_json
from .metrics import (
    DocScores,
    Embedder,
    MetricConfig,
    MetricReport,
    aggregate,
    score_document,
)
from .multihop import answer_multihop, single_hop_baseline
from .protocol.client import BackendClient
from .protocol.replay import FixtureRecorder
from .rag import KIND_BY_QID, rag_enhance
from .refine import build_answer_set
from .types import AnswerSet, Corpus, Document, QId

FINAL_STAGE = "final"


def _doc_file(doc_id: str) -> str:
    return quote(doc_id, safe="") + ".json"


def run_id_for(corpus_dig: str, config_dig: str) -> str:
    return hashlib.sha256(f"{corpus_dig}:{config_dig}".encode()).hexdigest()[:16]


class Run:
    """One run directory plus its manifest."""

    def __init__(self, run_dir: str | Path):
        self.run_dir = Path(run_dir)
        self.manifest_path = self.run_dir / "manifest.json"
        self.manifest: dict[str, Any] = {}

    @classmethod
    def create_or_resume(
        cls,
        corpus_path: str | Path,
        config: PipelineConfig,
        run_dir: str | Path | None = None,
        timestamps: bool = False,
    ) -> "Run":
        corpus_dig = corpus_digest(corpus_path)
        config_dig = config.digest()
        rid = run_id_for(corpus_dig, config_dig)
        run = cls(Path(run_dir) if run_dir else Path(config.run_root) / rid)
        if run.manifest_path.exists():
            run.manifest = read_json(run.manifest_path)
            if (
                run.manifest.get("corpus_digest") != corpus_dig
                or run.manifest.get("config_digest") != config_dig
            ):
                raise StaleRunError(
                    f"run directory {run.run_dir} was created with a different "
                    "corpus or config; refusing to resume"
                )
        else:
            run.manifest = {
                "run_id": rid,
                "corpus_path": str(Path(corpus_path).resolve()),
                "corpus_digest": corpus_dig,
                "config_digest": config_dig,
                "config": config.as_dict(),
                "backend_ids": config.backend_ids,
                "stages": {},
                "failures": {},
            }
            if timestamps:
                run.manifest["timestamps"] = {
                    "created": _dt.datetime.now(_dt.timezone.utc).isoformat()
                }
            run.save()
        return run

    def save(self) -> None:
        write_json(self.manifest_path, self.manifest)

    def stage_dir(self, qid: QId, stage: str) -> Path:
        return self.run_dir / "stages" / qid.value / stage

    def stage_done(self, qid: QId, stage: str) -> bool:
        entry = self.manifest["stages"].get(f"{qid.value}/{stage}")
        if not entry or entry.get("status") != "done":
            return False
        return all((self.run_dir / f).exists() for f in entry.get("files", []))

    def mark_stage_done(self, qid: QId, stage: str, files: list[Path]) -> None:
        self.manifest["stages"][f"{qid.value}/{stage}"] = {
            "status": "done",
            "files": sorted(str(f.relative_to(self.run_dir)) for f in files),
        }
        self.save()

    def read_stage(self, qid: QId, stage: str, doc_id: str) -> Any:
        return read_json(self.stage_dir(qid, stage) / _doc_file(doc_id))


def resume_run(run_dir: str | Path) -> "PipelineRunner":
    """Reopen a run from its manifest: completed stages are skipped, pending
    ones execute. Raises StaleRunError when corpus or config bytes changed."""
    from .config import parse_config

    run = Run(run_dir)
    if not run.manifest_path.exists():
        raise StaleRunError(f"no manifest found under {run.run_dir}")
    run.manifest = read_json(run.manifest_path)
    config = parse_config(_strip_config_echo(run.manifest["config"]))
    corpus_path = run.manifest["corpus_path"]
    if corpus_digest(corpus_path) != run.manifest["corpus_digest"]:
        raise StaleRunError(f"corpus at {corpus_path} changed since the run was created")
    if config.digest() != run.manifest["config_digest"]:
        raise StaleRunError("config echoed in the manifest no longer parses to the same digest")
    corpus = load_corpus(corpus_path)
    return PipelineRunner(corpus, config, run)


def _strip_config_echo(echoed: dict) -> dict:
    # The echo is already in parse_config's input shape except that question
    # specs are fully expanded, which parse_config accepts as overrides.
    return echoed


class PipelineRunner:
    """Executes question pipelines over a corpus into one run directory."""

    def __init__(
        self,
        corpus: Corpus,
        config: PipelineConfig,
        run: Run,
        recorder: FixtureRecorder | None = None,
        keep_going: bool = False,
    ):
        self.corpus = corpus
        self.config = config
        self.run = run
        self.keep_going = keep_going
        self._recorder = recorder
        self._clients: dict[str, BackendClient] = {}

    # -- backend clients ----------------------------------------------------

    def client_for(self, model_id: str) -> BackendClient:
        if model_id not in self._clients:
            for desc in self.config.extractive:
                if desc.model_id == model_id:
                    self._clients[model_id] = BackendClient(desc, recorder=self._recorder)
                    break
            else:
                raise ConfigError(f"no extractive backend configured with model_id {model_id!r}")
        return self._clients[model_id]

    def gen_client(self) -> BackendClient:
        if "__gen__" not in self._clients:
            if self.config.generative is None:
                raise ConfigError("no generative backend configured")
            self._clients["__gen__"] = BackendClient(self.config.generative, recorder=self._recorder)
        return self._clients["__gen__"]

    def embed_client(self) -> BackendClient:
        if "__embed__" not in self._clients:
            if self.config.embedding is None:
                raise ConfigError("no embedding backend configured")
            self._clients["__embed__"] = BackendClient(self.config.embedding, recorder=self._recorder)
        return self._clients["__embed__"]

    def close(self) -> None:
        for client in self._clients.values():
            client.close()
        self._clients.clear()

    # -- stage plumbing -----------------------------------------------------

    def _documents(self) -> list[Document]:
        return sorted(self.corpus.documents, key=lambda d: d.doc_id)

    def _failed(self, qid: QId, doc_id: str) -> bool:
        return doc_id in self.run.manifest.get("failures", {}).get(qid.value, [])

    def _record_failure(self, qid: QId, doc_id: str, message: str) -> None:
        failures = self.run.manifest.setdefault("failures", {}).setdefault(qid.value, [])
        if doc_id not in failures:
            failures.append(doc_id)
            failures.sort()
        self.run.save()
        if not self.keep_going:
            raise StageError(f"{qid.value} failed on document {doc_id!r}: {message}")

    def _run_stage(
        self,
        qid: QId,
        stage: str,
        compute: Callable[[Document], dict],
    ) -> dict[str, dict]:
        """Compute (or reload) one stage for every document. Results are written
        by this thread only; workers only compute."""
        if self.run.stage_done(qid, stage):
            out = {}
            for doc in self._documents():
                if self._failed(qid, doc.doc_id):
                    continue
                payload = self.run.read_stage(qid, stage, doc.doc_id)
                if "error" not in payload:
                    out[doc.doc_id] = payload
            return out

        docs = [d for d in self._documents() if not self._failed(qid, d.doc_id)]

        def safe_compute(doc: Document) -> tuple[str, dict]:
            try:
                return doc.doc_id, compute(doc)
            except (StageError, ConfigError) as exc:
                return doc.doc_id, {"error": str(exc)}

        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(safe_compute, docs))
        else:
            results = [safe_compute(doc) for doc in docs]

        stage_dir = self.run.stage_dir(qid, stage)
        files = []
        out: dict[str, dict] = {}
        for doc_id, payload in results:
            files.append(write_json(stage_dir / _doc_file(doc_id), payload))
            if "error" in payload:
                self._record_failure(qid, doc_id, payload["error"])
            else:
                out[doc_id] = payload
        self.run.mark_stage_done(qid, stage, files)
        return out

    # -- question pipelines -------------------------------------------------

    def run_question(self, qid: QId) -> dict[str, AnswerSet]:
        """Execute the stage graph for one question over the whole corpus and
        return the headline answer set per document (ensemble when configured,
        the refined per-model sets otherwise)."""
        spec = self.config.question_specs[qid]
        if qid is QId.Q4:
            final = self._run_q4(spec)
        else:
            final = self._run_single_question(spec)
        headline: dict[str, AnswerSet] = {}
        for doc_id, by_label in final.items():
            label = self._headline_label(qid)
            if label in by_label:
                headline[doc_id] = AnswerSet.from_dict(by_label[label])
        return headline

    def _headline_label(self, qid: QId) -> str:
        ensemble = self.config.ensembles.get(qid)
        if qid is QId.Q4:
            k = self.config.q4_topk_per_sub[0]
            model = self.config.extractive[0].model_id if self.config.extractive else ""
            return f"multihop.k{k}/{model}"
        if ensemble is not None:
            return ensemble.label
        model = self.config.extractive[0].model_id if self.config.extractive else ""
        return f"rag/{model}" if qid in KIND_BY_QID else f"raw/{model}"

    def _run_single_question(self, spec) -> dict[str, dict]:
        qid = spec.qid
        policy = self.config.merge_policy_for(qid)
        models = [d.model_id for d in self.config.extractive]

        def extract(doc: Document) -> dict:
            return {
                m: answer_question(
                    doc,
                    spec,
                    self.client_for(m),
                    window_chars=self.config.window_chars,
                    stride_chars=self.config.stride_chars,
                ).as_dict()
                for m in models
            }

        extracted = self._run_stage(qid, "extract", extract)

        def refine(doc: Document) -> dict:
            payload = extracted[doc.doc_id]
            out = {}
            for m in models:
                outcome = ExtractionOutcome.from_dict(payload[m])
                out[m] = build_answer_set(
                    doc, qid, list(outcome.spans), policy, spec.nullable
                ).as_dict()
            return out

        refined = self._run_stage(qid, "refine", refine)

        rag_outputs: dict[str, dict] = {}
        if "rag" in spec.stages and qid in KIND_BY_QID:
            template = self.config.rag_templates.get(KIND_BY_QID[qid])

            def rag(doc: Document) -> dict:
                out = {}
                for m in models:
                    refined_set = AnswerSet.from_dict(refined[doc.doc_id][m])
                    evidence = [
                        prov.spans[0]
                        for prov in refined_set.provenance
                        if prov.spans
                    ]
                    answer_set = rag_enhance(
                        doc,
                        spec,
                        evidence,
                        self.gen_client(),
                        template=template,
                        max_new=self.config.rag_max_new,
                    )
                    out[m] = answer_set.as_dict()
                return out

            rag_outputs = self._run_stage(qid, "rag", rag)

        ensemble_spec = self.config.ensembles.get(qid)
        member_source = rag_outputs if rag_outputs else refined
        combined: dict[str, dict] = {}
        if "ensemble" in spec.stages and ensemble_spec is not None:

            def ensemble(doc: Document) -> dict:
                members = [
                    AnswerSet.from_dict(member_source[doc.doc_id][m])
                    for m in ensemble_spec.member_model_ids
                ]
                return combine(members).as_dict()

            combined = self._run_stage(qid, "ensemble", ensemble)

        def final(doc: Document) -> dict:
            out = {}
            for m in models:
                out[f"raw/{m}"] = refined[doc.doc_id][m]
            if rag_outputs:
                for m in models:
                    out[f"rag/{m}"] = rag_outputs[doc.doc_id][m]
            if combined:
                out[ensemble_spec.label] = combined[doc.doc_id]
            return out

        return self._run_stage(qid, FINAL_STAGE, final)

    def _q1_bridge_stage(self) -> str:
        return "ensemble" if self.config.ensembles.get(QId.Q1) is not None else "rag"

    def _require_q1_output(self) -> None:
        stage = self._q1_bridge_stage()
        if not self.run.stage_done(QId.Q1, stage):
            raise StageError(
                "Q4 requires Q1 output: run Q1 first "
                f"(missing stage Q1/{stage} in {self.run.run_dir})"
            )

    def _bridges_for(self, doc_id: str) -> list[str]:
        payload = self.run.read_stage(QId.Q1, self._q1_bridge_stage(), doc_id)
        if "error" in payload:
            raise StageError(f"Q1 bridge extraction failed for {doc_id!r}: {payload['error']}")
        if self.config.ensembles.get(QId.Q1) is None:
            payload = payload[self.config.extractive[0].model_id]
        return list(AnswerSet.from_dict(payload).answers)

    def _run_q4(self, spec) -> dict[str, dict]:
        qid = QId.Q4
        policy = self.config.merge_policy_for(qid)
        models = [d.model_id for d in self.config.extractive]
        self._require_q1_output()

        def extract(doc: Document) -> dict:
            return {
                m: answer_question(
                    doc,
                    spec,
                    self.client_for(m),
                    top_k=self.config.q4_baseline_topk,
                    window_chars=self.config.window_chars,
                    stride_chars=self.config.stride_chars,
                ).as_dict()
                for m in models
            }

        extracted = self._run_stage(qid, "extract", extract)

        def multihop(doc: Document) -> dict:
            bridges = self._bridges_for(doc.doc_id)
            out: dict[str, Any] = {}
            for m in models:
                per_topk = {}
                for k in self.config.q4_topk_per_sub:
                    answer_set, pre_merge = answer_multihop(
                        doc,
                        bridges,
                        self.client_for(m),
                        k,
                        spec,
                        policy,
                        template=self.config.q4_template,
                        bridge_cap=self.config.q4_bridge_cap,
                        window_chars=self.config.window_chars,
                        stride_chars=self.config.stride_chars,
                    )
                    per_topk[str(k)] = {
                        "answers": answer_set.as_dict(),
                        "pre_merge_spans": [s.as_dict() for s in pre_merge],
                    }
                out[m] = {"bridges": bridges, "per_topk": per_topk}
            return out

        multihopped = self._run_stage(qid, "multihop", multihop)

        def refine(doc: Document) -> dict:
            out = {}
            for m in models:
                outcome = ExtractionOutcome.from_dict(extracted[doc.doc_id][m])
                out[m] = build_answer_set(
                    doc, qid, list(outcome.spans), policy, spec.nullable
                ).as_dict()
            return out

        baselines = self._run_stage(qid, "refine", refine)

        def final(doc: Document) -> dict:
            out = {}
            for m in models:
                out[f"single_hop/{m}"] = baselines[doc.doc_id][m]
                for k in self.config.q4_topk_per_sub:
                    out[f"multihop.k{k}/{m}"] = multihopped[doc.doc_id][m]["per_topk"][str(k)][
                        "answers"
                    ]
            return out

        return self._run_stage(qid, FINAL_STAGE, final)

    # -- evaluation ---------------------------------------------------------

    def load_final_sets(self, qid: QId) -> dict[str, dict[str, AnswerSet]]:
        """label -> doc_id -> AnswerSet for one question, from persisted files."""
        if not self.run.stage_done(qid, FINAL_STAGE):
            return {}
        out: dict[str, dict[str, AnswerSet]] = {}
        for doc in self._documents():
            if self._failed(qid, doc.doc_id):
                continue
            payload = self.run.read_stage(qid, FINAL_STAGE, doc.doc_id)
            if "error" in payload:
                continue
            for label, answer_set in payload.items():
                out.setdefault(label, {})[doc.doc_id] = AnswerSet.from_dict(answer_set)
        return out


def evaluate_run(
    runner: PipelineRunner,
    tau: float | None = None,
    mentions_ignore_case: bool | None = None,
) -> MetricReport:
    """Score every persisted system against gold and write eval outputs.

    Embeddings are cached under eval/embedding_cache.json, so re-scoring with
    a different threshold reuses them without touching any backend.
    """
    config = runner.config
    cfg = MetricConfig(
        smat_threshold=tau if tau is not None else config.metric_config.smat_threshold,
        mentions_case_sensitive=(
            not mentions_ignore_case
            if mentions_ignore_case is not None
            else config.metric_config.mentions_case_sensitive
        ),
    )
    cache_path = runner.run.run_dir / "eval" / "embedding_cache.json"
    preload = read_json(cache_path) if cache_path.exists() else None

    class _NoBackendEmbedder(Embedder):
        def __init__(self, preloaded):
            super().__init__(client=None, preload=preloaded)  # type: ignore[arg-type]

        def vectors(self, texts):
            missing = [t for t in texts if t not in self._cache]
            if missing:
                raise ConfigError(
                    "no embedding backend configured and embedding cache lacks "
                    f"{len(missing)} strings (first: {missing[0]!r})"
                )
            return [self._cache[t] for t in texts]

    if config.embedding is not None:
        embedder = Embedder(runner.embed_client(), preload=preload)
    else:
        embedder = _NoBackendEmbedder(preload or {})

    per_doc: dict[tuple[str, str, str], DocScores] = {}
    for qid in QId:
        by_label = runner.load_final_sets(qid)
        for label, by_doc in sorted(by_label.items()):
            for doc_id, answer_set in sorted(by_doc.items()):
                gold = runner.corpus.gold.get((doc_id, qid))
                if gold is None:
                    continue
                per_doc[(doc_id, qid.value, label)] = score_document(gold, answer_set, cfg, embedder)
    if not per_doc:
        raise StageError(f"nothing to evaluate under {runner.run.run_dir}")

    report = aggregate(
        per_doc,
        metadata={
            "tau": cfg.smat_threshold,
            "mentions_case_sensitive": cfg.mentions_case_sensitive,
            "backend_ids": config.backend_ids,
            "config_digest": config.digest(),
            "run_id": runner.run.manifest.get("run_id"),
            "q4_topk_per_sub": list(config.q4_topk_per_sub),
        },
    )
    write_json(runner.run.run_dir / "eval" / "report.json", report.as_dict())
    write_json(cache_path, embedder.cache_snapshot())
    return report


def sweep_ensemble_pairs(
    runner: PipelineRunner,
    qid: QId,
    tau: float | None = None,
) -> list[dict[str, Any]]:
    """Score every unordered pair of per-model systems and rank by Similar
    Match, then F1. Requires gold labels and at least two per-model sets."""
    config = runner.config
    by_label = runner.load_final_sets(qid)
    prefix = "rag/" if qid in KIND_BY_QID else "raw/"
    members = {
        label[len(prefix) :]: by_doc for label, by_doc in by_label.items() if label.startswith(prefix)
    }
    if len(members) < 2:
        raise StageError(
            f"pair sweep needs at least two per-model answer sets for {qid.value}, found {len(members)}"
        )
    cfg = MetricConfig(
        smat_threshold=tau if tau is not None else config.metric_config.smat_threshold,
        mentions_case_sensitive=config.metric_config.mentions_case_sensitive,
    )
    embedder = Embedder(runner.embed_client())
    results = []
    for a, b in itertools.combinations(sorted(members), 2):
        scores: list[DocScores] = []
        for doc_id in sorted(members[a]):
            gold = runner.corpus.gold.get((doc_id, qid))
            if gold is None or doc_id not in members[b]:
                continue
            combined = combine([members[a][doc_id], members[b][doc_id]])
            scores.append(score_document(gold, combined, cfg, embedder))
        if not scores:
            continue
        n = len(scores)
        results.append(
            {
                "pair": [a, b],
                "f1": sum(s.f1 for s in scores) / n,
                "em": sum(s.em for s in scores) / n,
                "smat": sum(s.smat for s in scores) / n,
                "mentions": sum(s.mentions for s in scores) / n,
                "docs": n,
            }
        )
    results.sort(key=lambda r: (-r["smat"], -r["f1"], r["pair"]))
    return results
