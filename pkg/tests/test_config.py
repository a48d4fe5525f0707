"""Tests de la carga y validación de la configuración de experimentos."""
from pathlib import Path

import pytest
from scipy.special import gamma

from src.lab.config import CONFIG_DIR, DEFAULTS, ConfigError, config_from_dict, load_config


def test_default_file():
    config = load_config()
    assert config.seed == 20240607
    assert config.n_values == (10, 100, 1000)
    assert config.eval_times == (0.5, 1.0)
    assert config.limit.a_kind == "brownian"
    assert config.limit.d_kind == "drift"


def test_missing_file_uses_defaults(tmp_path, caplog):
    config = load_config(tmp_path / "nope.yaml")
    assert config.replicates == DEFAULTS["replicates"]
    assert "no encontrado" in caplog.text


def test_malformed_yaml_uses_defaults(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("seed: [1, 2\n")
    assert load_config(path).seed == DEFAULTS["seed"]


def test_yaml_must_be_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(path)


@pytest.mark.parametrize("name", ["lab.yaml", "converge_brownian.yaml", "converge_heavy.yaml"])
def test_shipped_files_load(name):
    assert load_config(CONFIG_DIR / name).replicates >= 100


def test_heavy_tailed_limit():
    config = load_config(CONFIG_DIR / "converge_heavy.yaml")
    assert config.limit.d_kind == "stable"
    assert config.limit.d_scale == pytest.approx(gamma(0.3) ** (1 / 0.7))
    assert config.model.wait_scale_exponent == pytest.approx(1 / 0.7)


@pytest.mark.parametrize("data", [
    {"n_values": [100, 10]},
    {"n_values": [0, 10]},
    {"n_values": []},
    {"eval_times": [2.0]},
    {"replicates": 0},
    {"seed": -1},
    {"n_jobs": 0},
    {"jump_dist": "levy"},
    {"limit_mesh": 0.0},
])
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_limit_kind_override():
    config = config_from_dict({"limit_a_kind": "drift", "limit_d_kind": "drift"})
    assert (config.limit.a_kind, config.limit.d_kind) == ("drift", "drift")


def test_overrides():
    config = config_from_dict({}).with_overrides(seed=7, output_dir="out", mesh=0.01)
    assert config.seed == 7
    assert config.output_dir == Path("out")
    assert config.limit.mesh == 0.01
    assert config.to_dict()["seed"] == 7


def test_overrides_keep_file_values():
    config = config_from_dict({"replicates": 123}).with_overrides(seed=1)
    assert config.replicates == 123
