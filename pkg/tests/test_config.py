import pytest

from trajpred.config import DEFAULTS, RunConfig, load_config, parse_overrides
from trajpred.data import ConfigError


def test_defaults_complete():
    cfg = RunConfig()
    assert cfg["model.d"] == 64
    assert cfg["model.heads"] == 4
    assert cfg["model.p"] == 0.75
    assert cfg["data.t_h"] == 8
    assert cfg["data.t_f"] == 12
    assert cfg.as_dict() == DEFAULTS


def test_load_missing_path_gives_defaults():
    cfg = load_config(None)
    assert cfg.as_dict() == DEFAULTS


def test_load_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment\n"
        "\n"
        "model.d = 32\n"
        "model.p=0.9\n"
        "data.kind = crossing\n"
        "eval.baseline = true\n"
    )
    cfg = load_config(str(path))
    assert cfg["model.d"] == 32
    assert cfg["model.p"] == 0.9
    assert cfg["data.kind"] == "crossing"
    assert cfg["eval.baseline"] is True


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("model.width = 7\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_malformed_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("model.d 32\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_type_coercion_errors():
    cfg = RunConfig()
    with pytest.raises(ConfigError):
        cfg.set("model.d", "large")
    with pytest.raises(ConfigError):
        cfg.set("model.p", "most")
    with pytest.raises(ConfigError):
        cfg.set("eval.baseline", "maybe")


def test_validation():
    with pytest.raises(ConfigError):
        RunConfig({"model.p": 0.0})
    with pytest.raises(ConfigError):
        RunConfig({"model.p": 1.5})
    with pytest.raises(ConfigError):
        RunConfig({"data.t_h": 0})
    with pytest.raises(ConfigError):
        RunConfig({"loss.min_scope": "per_point"})
    with pytest.raises(ConfigError):
        RunConfig({"train.lr_decay": "linear"})
    RunConfig({"model.p": 1.0})  # boundary is legal


def test_parse_overrides():
    cfg = parse_overrides(RunConfig(), ["model.p=0.85", "train.epochs=3"])
    assert cfg["model.p"] == 0.85
    assert cfg["train.epochs"] == 3
    with pytest.raises(ConfigError):
        parse_overrides(RunConfig(), ["model.p"])
