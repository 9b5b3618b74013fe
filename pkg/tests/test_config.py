import json

import pytest

from config import Config, load_config


def write_config(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_project_defaults(monkeypatch):
    monkeypatch.delenv("LATTICEFORGE_BUDGET", raising=False)
    monkeypatch.delenv("LATTICEFORGE_THREADS", raising=False)
    config = load_config()
    assert isinstance(config, Config)
    assert config.evaluation_budget == 10**10
    assert config.max_dot_size == 200
    assert config.threads >= 1


def test_values_from_file(tmp_path, monkeypatch):
    monkeypatch.delenv("LATTICEFORGE_BUDGET", raising=False)
    monkeypatch.delenv("LATTICEFORGE_THREADS", raising=False)
    path = write_config(tmp_path / "c.json", {"limits": {"max_cambrian": 9}, "scan": {"threads": 3}})
    config = load_config(path)
    assert config.max_cambrian == 9
    assert config.threads == 3
    assert config.max_bmn_atoms == 12


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("LATTICEFORGE_BUDGET", "5000")
    monkeypatch.setenv("LATTICEFORGE_THREADS", "2")
    monkeypatch.setenv("LATTICEFORGE_REPORT", str(tmp_path / "r.json"))
    config = load_config(write_config(tmp_path / "c.json", {}))
    assert config.evaluation_budget == 5000
    assert config.threads == 2
    assert config.report_file_path == str(tmp_path / "r.json")


def test_invalid_values(tmp_path, monkeypatch):
    monkeypatch.delenv("LATTICEFORGE_BUDGET", raising=False)
    with pytest.raises(ValueError):
        load_config(write_config(tmp_path / "c.json", {"scan": {"evaluation_budget": 0}}))
    monkeypatch.setenv("LATTICEFORGE_THREADS", "many")
    with pytest.raises(ValueError):
        load_config(write_config(tmp_path / "d.json", {}))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "nope.json"))
