import pytest

from polyharm.config import ENV_VARS


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep the caller's POLYHARM_* variables out and the run log in tmp."""
    for var in ENV_VARS.values():
        monkeypatch.delenv(var, raising=False)
    monkeypatch.delenv("POLYHARM_CONFIG", raising=False)
    monkeypatch.setenv("POLYHARM_RUN_LOG", str(tmp_path / "logs" / "runs.log"))
    return tmp_path
