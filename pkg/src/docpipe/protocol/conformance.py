"""Contract checks any wire-protocol server must pass.

Content-agnostic: a server may return zero extractive answers for a probe,
but whatever it returns must be schema-valid, deterministic, and must slice
the submitted context exactly. Run against an httpx-compatible client whose
base URL points at one served model.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .wire import (
    Capability,
    EmbedResponse,
    ExtractiveResponse,
    GenerateResponse,
)

_VOCAB = (
    "we used latent dirichlet allocation topic models to analyze survey text and "
    "support vector machines for classification while the software stack included "
    "python sklearn and r the research question asked how moral language predicts "
    "sharing behavior across social networks"
).split()


@dataclass
class ConformanceReport:
    failures: list[str] = field(default_factory=list)
    checks_run: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, condition: bool, message: str) -> None:
        self.checks_run += 1
        if not condition:
            self.failures.append(message)


def _random_context(rng: random.Random, n_words: int = 60) -> str:
    return " ".join(rng.choice(_VOCAB) for _ in range(n_words))


def check_extractive(client, report: ConformanceReport, n_random_contexts: int = 100, seed: int = 13) -> None:
    rng = random.Random(seed)
    question = "What machine learning or natural language processing techniques were used?"

    rejected = client.post("/v1/extractive_qa", json={"question": question, "context": "x", "top_k": 0})
    report.check(rejected.status_code in (400, 422), f"top_k=0 accepted (HTTP {rejected.status_code})")

    for i in range(n_random_contexts):
        context = _random_context(rng)
        body = {"question": question, "context": context, "top_k": 5}
        resp = client.post("/v1/extractive_qa", json=body)
        report.check(resp.status_code == 200, f"probe {i}: HTTP {resp.status_code}")
        if resp.status_code != 200:
            continue
        try:
            parsed = ExtractiveResponse.model_validate(resp.json())
        except Exception as exc:
            report.check(False, f"probe {i}: schema violation: {exc}")
            continue
        report.check(len(parsed.answers) <= 5, f"probe {i}: more answers than top_k")
        prev = 1.0
        for a in parsed.answers:
            report.check(0.0 <= a.score <= 1.0, f"probe {i}: score {a.score} outside [0, 1]")
            report.check(a.score <= prev, f"probe {i}: scores not descending")
            prev = a.score
            report.check(
                a.end <= len(context) and context[a.start : a.end] == a.text,
                f"probe {i}: offsets [{a.start}, {a.end}) do not slice context to {a.text!r}",
            )
        again = client.post("/v1/extractive_qa", json=body)
        report.check(
            again.status_code == 200 and again.json() == resp.json(),
            f"probe {i}: extractive response not deterministic",
        )


def check_generate(client, report: ConformanceReport) -> None:
    body = {"prompt": "List each technique mentioned: 1. latent dirichlet allocation", "max_new_tokens": 64, "temperature": 0.0}
    resp = client.post("/v1/generate", json=body)
    report.check(resp.status_code == 200, f"generate: HTTP {resp.status_code}")
    if resp.status_code != 200:
        return
    try:
        GenerateResponse.model_validate(resp.json())
    except Exception as exc:
        report.check(False, f"generate: schema violation: {exc}")
        return
    again = client.post("/v1/generate", json=body)
    report.check(
        again.status_code == 200 and again.json() == resp.json(),
        "generate: temperature-0 response not deterministic",
    )


def check_embed(client, report: ConformanceReport) -> None:
    rejected = client.post("/v1/embed", json={"texts": []})
    report.check(rejected.status_code in (400, 422), f"embed: empty texts accepted (HTTP {rejected.status_code})")

    body = {"texts": ["a", "a", "latent dirichlet allocation"]}
    resp = client.post("/v1/embed", json=body)
    report.check(resp.status_code == 200, f"embed: HTTP {resp.status_code}")
    if resp.status_code != 200:
        return
    try:
        parsed = EmbedResponse.model_validate(resp.json())
    except Exception as exc:
        report.check(False, f"embed: schema violation: {exc}")
        return
    report.check(len(parsed.embeddings) == 3, "embed: vector count mismatch")
    dims = {len(v) for v in parsed.embeddings}
    report.check(len(dims) == 1, f"embed: inconsistent dimensions {sorted(dims)}")
    report.check(all(any(x != 0.0 for x in v) for v in parsed.embeddings), "embed: zero-norm vector")
    report.check(parsed.embeddings[0] == parsed.embeddings[1], "embed: identical texts gave different vectors")
    again = client.post("/v1/embed", json=body)
    report.check(
        again.status_code == 200 and again.json() == resp.json(),
        "embed: response not deterministic",
    )


def run_conformance(
    client,
    capabilities: set[Capability],
    n_random_contexts: int = 100,
    seed: int = 13,
) -> ConformanceReport:
    """Run the contract suite against one served model. `client` is any
    httpx-compatible client rooted at the model's base URL."""
    report = ConformanceReport()
    if Capability.EXTRACTIVE_QA in capabilities:
        check_extractive(client, report, n_random_contexts=n_random_contexts, seed=seed)
    if Capability.GENERATE in capabilities:
        check_generate(client, report)
    if Capability.EMBED in capabilities:
        check_embed(client, report)
    return report
