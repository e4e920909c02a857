import os

import pytest
from hypothesis import settings

settings.register_profile("diagsum", derandomize=True, deadline=None, max_examples=60)
settings.register_profile("ci", derandomize=True, deadline=None, max_examples=200)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "diagsum"))


@pytest.fixture
def isolated_config(tmp_path, monkeypatch):
    """Point the config directory at an empty temporary folder."""
    config_dir = tmp_path / "config"
    config_dir.mkdir()
    monkeypatch.setenv("DIAGSUM_CONFIG_DIR", str(config_dir))
    monkeypatch.chdir(tmp_path)
    return config_dir
