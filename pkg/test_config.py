import json

import pytest

from src.data.config_manager import (
    DEFAULT_FREE_BIT_LIMIT, ConfigManager, resolve_free_bit_limit,
)


@pytest.fixture
def config(tmp_path, monkeypatch):
    monkeypatch.delenv("PERSYM_FREE_BIT_LIMIT", raising=False)
    return ConfigManager(config_dir=str(tmp_path))


def test_defaults_written_on_first_use(config, tmp_path):
    saved = json.loads((tmp_path / "config.json").read_text())
    assert saved == ConfigManager.DEFAULT_CONFIG
    assert config.free_bit_limit == DEFAULT_FREE_BIT_LIMIT
    assert config.default_engine == "prefix"
    assert config.output_format == "table"


def test_values_persist(config, tmp_path):
    config.free_bit_limit = 24
    config.default_engine = "naive"
    reloaded = ConfigManager(config_dir=str(tmp_path))
    assert reloaded.free_bit_limit == 24
    assert reloaded.default_engine == "naive"
    reloaded.reset_to_defaults()
    assert ConfigManager(config_dir=str(tmp_path)).free_bit_limit == DEFAULT_FREE_BIT_LIMIT


def test_unknown_engine_rejected(config):
    with pytest.raises(ValueError):
        config.default_engine = "fast"


def test_older_files_gain_new_keys(tmp_path):
    (tmp_path / "config.json").write_text(json.dumps({"free_bit_limit": 20}))
    config = ConfigManager(config_dir=str(tmp_path))
    assert config.get_value("free_bit_limit") == 20
    assert config.get_value("default_workers") == 1


def test_unreadable_file_falls_back_to_defaults(tmp_path):
    (tmp_path / "config.json").write_text("{broken")
    assert ConfigManager(config_dir=str(tmp_path)).config == ConfigManager.DEFAULT_CONFIG


def test_config_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("PERSYM_CONFIG_DIR", str(tmp_path / "env"))
    config = ConfigManager()
    assert config.config_dir == str(tmp_path / "env")
    assert (tmp_path / "env" / "config.json").exists()


def test_free_bit_limit_resolution(monkeypatch):
    monkeypatch.delenv("PERSYM_FREE_BIT_LIMIT", raising=False)
    assert resolve_free_bit_limit() == DEFAULT_FREE_BIT_LIMIT
    assert resolve_free_bit_limit(configured=25) == 25
    monkeypatch.setenv("PERSYM_FREE_BIT_LIMIT", "40")
    assert resolve_free_bit_limit(configured=25) == 40
    assert resolve_free_bit_limit(explicit=12, configured=25) == 12
    monkeypatch.setenv("PERSYM_FREE_BIT_LIMIT", "lots")
    assert resolve_free_bit_limit(configured=25) == 25
