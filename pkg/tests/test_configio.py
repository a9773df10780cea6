import json

import pytest

from llmlimits.configio import ENV_CONFIG, load_config, load_default_config, parse_config
from llmlimits.errors import ConfigError

VALID = {
    "models": [{
        "name": "tiny-dense", "num_layers": 4, "embed_dim": 256, "heads": 8,
        "kv_heads": 2, "head_dim": 32, "ffn_dim": 1024, "nominal_params": 5e7,
    }],
    "chips": [{
        "name": "lab-chip", "mem_bw_tbs": 2.0, "tensor_pflops": 0.5,
        "scalar_pflops": 0.05, "mem_capacity_bytes": 16e9,
    }],
    "power": {"lab-chip": {"chip_w_per_mm2": 0.5}},
    "sweeps": [{
        "models": ["tiny-dense"], "chips": ["lab-chip"],
        "tps": [1, 2], "contexts": [1024],
    }],
}


def test_parse_valid_config():
    cfg = parse_config(VALID)
    assert "tiny-dense" in cfg.models
    assert cfg.chips["lab-chip"].mem_bw_tbs == 2.0
    assert cfg.power["lab-chip"].chip_w_per_mm2 == 0.5
    assert len(cfg.sweeps) == 1
    assert cfg.sweeps[0].batches == "one"


def test_missing_field_identified():
    bad = {"models": [{"name": "x", "num_layers": 2}]}
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert "models.0" in str(exc.value)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config({"modles": []})
    assert "modles" in str(exc.value)


def test_load_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(VALID))
    cfg = load_config(path)
    assert cfg.models["tiny-dense"].ffn_dim == 1024


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_load_config_bad_json_reports_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"models": [,]}')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert "broken.json:1" in str(exc.value)


def test_env_var_default(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(VALID))
    monkeypatch.setenv(ENV_CONFIG, str(path))
    cfg = load_default_config()
    assert "lab-chip" in cfg.chips


def test_no_env_var_gives_empty(monkeypatch):
    monkeypatch.delenv(ENV_CONFIG, raising=False)
    cfg = load_default_config()
    assert not cfg.models and not cfg.chips
