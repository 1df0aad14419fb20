import pytest
import yaml

from docpipe.config import load_config, parse_config
from docpipe.errors import ConfigError
from docpipe.types import QId

RAW = {
    "workers": 1,
    "backends": {
        "extractive": [
            {"model_id": "deberta", "endpoint": "mock://x", "params": {"seed": 1}},
            {"model_id": "albert", "endpoint": "mock://x", "params": {"seed": 2}},
        ],
        "generative": {"model_id": "llama3", "endpoint": "mock://gen", "params": {"seed": 9}},
        "embedding": {"model_id": "e5-mock", "endpoint": "mock://embed", "params": {"seed": 101}},
    },
    "questions": {"Q1": {"topk": 12}},
    "ensemble": {"Q1": {"members": ["deberta", "albert"]}},
    "metrics": {"tau": 0.75},
    "q4": {"topk_per_sub": [1, 3]},
}


def test_parse_config_basics():
    config = parse_config(RAW)
    assert [d.model_id for d in config.extractive] == ["deberta", "albert"]
    assert config.question_specs[QId.Q1].topk == 12
    assert config.question_specs[QId.Q2].topk == 5  # default retained
    assert config.metric_config.smat_threshold == 0.75
    assert config.q4_topk_per_sub == (1, 3)
    assert config.ensembles[QId.Q1].member_model_ids == ("deberta", "albert")


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        parse_config({"no_such_key": 1})
    with pytest.raises(ConfigError):
        parse_config({"metrics": {"tau": 0.8, "typo": True}})
    with pytest.raises(ConfigError):
        parse_config({"questions": {"Q1": {"topkk": 3}}})


def test_invalid_values_rejected():
    with pytest.raises(ConfigError):
        parse_config({"metrics": {"tau": 0.0}})
    with pytest.raises(ConfigError):
        parse_config({"questions": {"Q1": {"topk": 0}}})
    with pytest.raises(ConfigError):
        parse_config({"windowing": {"window_chars": 100, "stride_chars": 200}})
    with pytest.raises(ConfigError):
        parse_config({"q4": {"topk_per_sub": [0]}})
    with pytest.raises(ConfigError):
        parse_config(
            {
                "backends": {"extractive": [{"model_id": "a", "endpoint": "mock://x"}]},
                "ensemble": {"Q1": {"members": ["a", "missing"]}},
            }
        )


def test_digest_stable_and_echo_reparses():
    config = parse_config(RAW)
    assert config.digest() == parse_config(RAW).digest()
    echoed = parse_config(config.as_dict())
    assert echoed.digest() == config.digest()


def test_digest_changes_with_config():
    base = parse_config(RAW)
    changed = dict(RAW)
    changed["metrics"] = {"tau": 0.9}
    assert parse_config(changed).digest() != base.digest()


def test_load_config_from_file_and_env(tmp_path, monkeypatch):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(RAW))
    config = load_config(path)
    assert config.metric_config.smat_threshold == 0.75

    monkeypatch.setenv("DOCPIPE_CONFIG", str(path))
    assert load_config().metric_config.smat_threshold == 0.75
    monkeypatch.delenv("DOCPIPE_CONFIG")
    assert load_config().metric_config.smat_threshold == 0.80  # defaults

    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_merge_policy_per_question():
    config = parse_config(RAW)
    assert config.merge_policy_for(QId.Q1).enabled
    assert not config.merge_policy_for(QId.Q2).enabled
