import logging

import pytest

from polyharm.config import (
    DEFAULT_RUN_LOG,
    Settings,
    load_settings,
    read_config_file,
)


def _write(tmp_path, text, name="polyharm.yml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_without_config(tmp_path):
    settings = load_settings(env={"POLYHARM_CONFIG": str(tmp_path / "missing.yml")})
    assert settings == Settings()
    assert settings.run_log == DEFAULT_RUN_LOG
    assert settings.to_dict()["seed"] == 42


def test_shipped_config_matches_defaults():
    assert load_settings(env={}) == Settings()


def test_yaml_values_are_applied(tmp_path):
    path = _write(tmp_path, "seed: 7\ntolerance: 1.0e-8\nlog_level: info\n")
    settings = load_settings(path, env={})
    assert settings.seed == 7
    assert settings.tolerance == 1e-8
    assert settings.log_level == "INFO"


def test_environment_overrides_yaml(tmp_path):
    path = _write(tmp_path, "points: 10\nthreads: 2\n")
    env = {"POLYHARM_POINTS": "25", "POLYHARM_THREADS": ""}
    settings = load_settings(path, env=env)
    assert settings.points == 25
    assert settings.threads == 2


def test_config_path_from_environment(tmp_path):
    path = _write(tmp_path, "max_order: 4\n", name="other.yml")
    assert load_settings(env={"POLYHARM_CONFIG": str(path)}).max_order == 4


def test_explicit_config_must_exist(tmp_path):
    with pytest.raises(ValueError, match="does not exist"):
        load_settings(tmp_path / "nope.yml", env={})


def test_unknown_key_is_ignored_with_warning(tmp_path, caplog):
    path = _write(tmp_path, "seed: 3\ncolour: blue\n")
    with caplog.at_level(logging.WARNING, logger="polyharm.config"):
        settings = load_settings(path, env={})
    assert settings.seed == 3
    assert "colour" in caplog.text


@pytest.mark.parametrize(
    "text",
    ["points: many\n", "seed: 1.5\n", "threads: 0\n", "log_level: loud\n", "tolerance: -1\n"],
)
def test_invalid_values_are_rejected(tmp_path, text):
    with pytest.raises(ValueError):
        load_settings(_write(tmp_path, text), env={})


def test_invalid_environment_value():
    with pytest.raises(ValueError, match="POLYHARM_SEED"):
        load_settings(env={"POLYHARM_SEED": "abc"})


def test_config_file_must_be_a_mapping(tmp_path):
    assert read_config_file(tmp_path / "missing.yml") == {}
    assert read_config_file(_write(tmp_path, "")) == {}
    with pytest.raises(ValueError, match="mapping"):
        read_config_file(_write(tmp_path, "- 1\n- 2\n"))
    with pytest.raises(ValueError, match="cannot parse"):
        read_config_file(_write(tmp_path, "seed: [1,\n"))
