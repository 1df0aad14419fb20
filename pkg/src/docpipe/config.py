"""Pipeline configuration: parse, validate, freeze, digest.

A single YAML (or JSON) tree; unknown keys are rejected so typos fail fast.
The effective config is echoed into every run manifest.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .ensemble import DEFAULT_ENSEMBLE_MEMBERS, EnsembleSpec
from .extraction import DEFAULT_STRIDE_CHARS, DEFAULT_WINDOW_CHARS
from .metrics import MetricConfig
from .multihop import DEFAULT_BASELINE_TOPK, DEFAULT_SUBQUESTION_TEMPLATE
from .protocol.wire import BackendDescriptor, Capability, canonical_json
from .refine import MergePolicy
from .types import QId, QuestionSpec, default_question_specs

CONFIG_ENV_VAR = "DOCPIPE_CONFIG"

_TOP_KEYS = {
    "workers",
    "run_root",
    "windowing",
    "merge",
    "backends",
    "questions",
    "rag",
    "q4",
    "ensemble",
    "metrics",
}


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys under {where}: {unknown}")


@dataclass(frozen=True)
class PipelineConfig:
    extractive: tuple[BackendDescriptor, ...]
    generative: BackendDescriptor | None
    embedding: BackendDescriptor | None
    question_specs: dict[QId, QuestionSpec]
    merge_policy: MergePolicy
    metric_config: MetricConfig
    ensembles: dict[QId, EnsembleSpec]
    rag_templates: dict[str, str | None] = field(default_factory=dict)
    rag_max_new: int = 256
    q4_template: str = DEFAULT_SUBQUESTION_TEMPLATE
    q4_topk_per_sub: tuple[int, ...] = (1, 3, 5)
    q4_baseline_topk: int = DEFAULT_BASELINE_TOPK
    q4_bridge_cap: int | None = None
    window_chars: int = DEFAULT_WINDOW_CHARS
    stride_chars: int = DEFAULT_STRIDE_CHARS
    workers: int = 1
    run_root: str = "runs"

    @property
    def backend_ids(self) -> list[str]:
        ids = [d.model_id for d in self.extractive]
        if self.generative:
            ids.append(self.generative.model_id)
        if self.embedding:
            ids.append(self.embedding.model_id)
        return ids

    def merge_policy_for(self, qid: QId) -> MergePolicy:
        spec = self.question_specs[qid]
        if spec.merge_enabled:
            return self.merge_policy
        return MergePolicy(
            enabled=False,
            allow_adjacent_gap=self.merge_policy.allow_adjacent_gap,
            containment_merge=self.merge_policy.containment_merge,
        )

    def as_dict(self) -> dict:
        """Echo of the effective config; feeding this back to parse_config
        reproduces the same digest."""

        def dump_backend(d: BackendDescriptor) -> dict:
            return d.model_dump(exclude={"capability"})

        def dump_spec(spec: QuestionSpec) -> dict:
            out = spec.as_dict()
            out.pop("qid")
            return out

        return {
            "backends": {
                "extractive": [dump_backend(d) for d in self.extractive],
                "generative": dump_backend(self.generative) if self.generative else None,
                "embedding": dump_backend(self.embedding) if self.embedding else None,
            },
            "questions": {qid.value: dump_spec(spec) for qid, spec in sorted(self.question_specs.items())},
            "merge": {
                "allow_adjacent_gap": self.merge_policy.allow_adjacent_gap,
                "containment_merge": self.merge_policy.containment_merge,
            },
            "metrics": {
                "tau": self.metric_config.smat_threshold,
                "mentions_ignore_case": not self.metric_config.mentions_case_sensitive,
            },
            "ensemble": {
                qid.value: {"members": list(spec.member_model_ids), "label": spec.label}
                for qid, spec in sorted(self.ensembles.items())
            },
            "rag": {"template": dict(sorted(self.rag_templates.items())), "max_new": self.rag_max_new},
            "q4": {
                "template": self.q4_template,
                "topk_per_sub": list(self.q4_topk_per_sub),
                "baseline_topk": self.q4_baseline_topk,
                "bridge_cap": self.q4_bridge_cap,
            },
            "windowing": {"window_chars": self.window_chars, "stride_chars": self.stride_chars},
            "workers": self.workers,
            "run_root": self.run_root,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.as_dict()).encode("utf-8")).hexdigest()


def _parse_backend(entry: dict, capability: Capability, where: str) -> BackendDescriptor:
    _reject_unknown(entry, {"model_id", "endpoint", "timeout", "max_context", "params"}, where)
    try:
        return BackendDescriptor(capability=capability, **entry)
    except Exception as exc:
        raise ConfigError(f"invalid backend under {where}: {exc}") from exc


def _parse_questions(raw: dict, base: dict[QId, QuestionSpec]) -> dict[QId, QuestionSpec]:
    specs = dict(base)
    for qid_name, overrides in raw.items():
        try:
            qid = QId(qid_name)
        except ValueError:
            raise ConfigError(f"unknown question id {qid_name!r}") from None
        _reject_unknown(
            overrides,
            {"text", "answer_type", "nullable", "topk", "merge_enabled", "stages"},
            f"questions.{qid_name}",
        )
        merged = specs[qid].as_dict()
        merged.update(overrides)
        try:
            specs[qid] = QuestionSpec.from_dict(merged)
        except ValueError as exc:
            raise ConfigError(f"questions.{qid_name}: {exc}") from exc
    return specs


def load_config(
    path: str | Path | None = None,
    base_specs: dict[QId, QuestionSpec] | None = None,
) -> PipelineConfig:
    """Load from an explicit path, else $DOCPIPE_CONFIG, else built-in defaults
    (which have no backends and only support offline operations)."""
    base_dir: Path | None = None
    if path is None:
        env = os.environ.get(CONFIG_ENV_VAR)
        if env:
            raw = yaml.safe_load(Path(env).read_text(encoding="utf-8")) or {}
            base_dir = Path(env).resolve().parent
        else:
            raw = {}
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        raw = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        base_dir = p.resolve().parent
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    if base_dir is not None:
        _resolve_relative_paths(raw, base_dir)
    return parse_config(raw, base_specs=base_specs)


def _resolve_relative_paths(raw: dict, base_dir: Path) -> None:
    """Backend file references (mock tables, replay fixtures) resolve relative
    to the config file so shipped configs work from any working directory."""

    def absolutize(value: str) -> str:
        p = Path(value)
        return str(p if p.is_absolute() else (base_dir / p).resolve())

    backends = raw.get("backends") or {}
    entries = list(backends.get("extractive") or [])
    for key in ("generative", "embedding"):
        if backends.get(key):
            entries.append(backends[key])
    for entry in entries:
        if not isinstance(entry, dict):
            continue
        params = entry.get("params")
        if isinstance(params, dict):
            for pkey in ("table", "fixtures"):
                if isinstance(params.get(pkey), str):
                    params[pkey] = absolutize(params[pkey])
        endpoint = entry.get("endpoint")
        if isinstance(endpoint, str) and endpoint.startswith("replay://") and len(endpoint) > 9:
            entry["endpoint"] = "replay://" + absolutize(endpoint[len("replay://") :])


def parse_config(raw: dict, base_specs: dict[QId, QuestionSpec] | None = None) -> PipelineConfig:
    """Validate and freeze a config tree. `base_specs` (usually the corpus's
    own question specs) seeds the per-question settings before overrides."""
    _reject_unknown(raw, _TOP_KEYS, "<root>")

    backends = raw.get("backends", {})
    _reject_unknown(backends, {"extractive", "generative", "embedding"}, "backends")
    extractive = tuple(
        _parse_backend(entry, Capability.EXTRACTIVE_QA, f"backends.extractive[{i}]")
        for i, entry in enumerate(backends.get("extractive", []))
    )
    ids = [d.model_id for d in extractive]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate extractive model_ids: {ids}")
    generative = (
        _parse_backend(backends["generative"], Capability.GENERATE, "backends.generative")
        if backends.get("generative")
        else None
    )
    embedding = (
        _parse_backend(backends["embedding"], Capability.EMBED, "backends.embedding")
        if backends.get("embedding")
        else None
    )

    question_specs = _parse_questions(
        raw.get("questions", {}), base_specs if base_specs is not None else default_question_specs()
    )

    merge_raw = raw.get("merge", {})
    _reject_unknown(merge_raw, {"allow_adjacent_gap", "containment_merge"}, "merge")
    try:
        merge_policy = MergePolicy(enabled=True, **merge_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"merge: {exc}") from exc

    metrics_raw = raw.get("metrics", {})
    _reject_unknown(metrics_raw, {"tau", "mentions_ignore_case"}, "metrics")
    try:
        metric_config = MetricConfig(
            smat_threshold=float(metrics_raw.get("tau", 0.80)),
            mentions_case_sensitive=not bool(metrics_raw.get("mentions_ignore_case", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"metrics: {exc}") from exc

    ensembles: dict[QId, EnsembleSpec] = {}
    ensemble_raw = raw.get("ensemble")
    if ensemble_raw is None:
        available = set(ids)
        for qid, members in DEFAULT_ENSEMBLE_MEMBERS.items():
            if set(members) <= available:
                ensembles[qid] = EnsembleSpec(qid=qid, member_model_ids=members)
    else:
        for qid_name, entry in ensemble_raw.items():
            try:
                qid = QId(qid_name)
            except ValueError:
                raise ConfigError(f"ensemble: unknown question id {qid_name!r}") from None
            _reject_unknown(entry, {"members", "label"}, f"ensemble.{qid_name}")
            members = tuple(entry.get("members", ()))
            unknown_members = sorted(set(members) - set(ids))
            if unknown_members:
                raise ConfigError(f"ensemble.{qid_name}: unknown members {unknown_members}")
            try:
                ensembles[qid] = EnsembleSpec(
                    qid=qid, member_model_ids=members, label=entry.get("label", "Combined")
                )
            except ValueError as exc:
                raise ConfigError(f"ensemble.{qid_name}: {exc}") from exc

    rag_raw = raw.get("rag", {})
    _reject_unknown(rag_raw, {"template", "max_new"}, "rag")
    rag_templates_raw = rag_raw.get("template", {}) or {}
    _reject_unknown(rag_templates_raw, {"techniques", "software"}, "rag.template")

    q4_raw = raw.get("q4", {})
    _reject_unknown(q4_raw, {"template", "topk_per_sub", "baseline_topk", "bridge_cap"}, "q4")
    topk_per_sub = q4_raw.get("topk_per_sub", [1, 3, 5])
    if isinstance(topk_per_sub, int):
        topk_per_sub = [topk_per_sub]
    if not topk_per_sub or any(not isinstance(k, int) or k < 1 for k in topk_per_sub):
        raise ConfigError(f"q4.topk_per_sub must be positive ints, got {topk_per_sub}")

    windowing_raw = raw.get("windowing", {})
    _reject_unknown(windowing_raw, {"window_chars", "stride_chars"}, "windowing")
    window_chars = int(windowing_raw.get("window_chars", DEFAULT_WINDOW_CHARS))
    stride_chars = int(windowing_raw.get("stride_chars", DEFAULT_STRIDE_CHARS))
    if not (0 < stride_chars <= window_chars):
        raise ConfigError(f"windowing: need 0 < stride ({stride_chars}) <= window ({window_chars})")

    workers = int(raw.get("workers", 1))
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    return PipelineConfig(
        extractive=extractive,
        generative=generative,
        embedding=embedding,
        question_specs=question_specs,
        merge_policy=merge_policy,
        metric_config=metric_config,
        ensembles=ensembles,
        rag_templates={k: rag_templates_raw.get(k) for k in ("techniques", "software")},
        rag_max_new=int(rag_raw.get("max_new", 256)),
        q4_template=q4_raw.get("template", DEFAULT_SUBQUESTION_TEMPLATE),
        q4_topk_per_sub=tuple(sorted(set(topk_per_sub))),
        q4_baseline_topk=int(q4_raw.get("baseline_topk", DEFAULT_BASELINE_TOPK)),
        q4_bridge_cap=q4_raw.get("bridge_cap"),
        window_chars=window_chars,
        stride_chars=stride_chars,
        workers=workers,
        run_root=str(raw.get("run_root", "runs")),
    )
