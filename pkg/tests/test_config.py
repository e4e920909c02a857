import json
import os

from diagsum.config_manager import DEFAULT_CONFIG, ConfigManager


def test_defaults_are_written_on_first_run(isolated_config):
    config = ConfigManager()
    assert config.get_config_file_path() == os.path.join(str(isolated_config), "config.json")
    assert os.path.exists(config.get_config_file_path())
    assert config.get("normest", "starts") == DEFAULT_CONFIG["normest"]["starts"]
    assert config.get("normest", "missing", default=7) == 7


def test_no_file_without_create_default(isolated_config):
    config = ConfigManager(create_default=False)
    assert not os.path.exists(config.get_config_file_path())
    assert config.get("experiments", "seed") == 12345


def test_user_values_merge_over_defaults(tmp_path):
    path = tmp_path / "custom.json"
    path.write_text(json.dumps({"normest": {"starts": 4}, "extra": {"flag": True}}))
    config = ConfigManager(str(path))
    assert config.get("normest", "starts") == 4
    assert config.get("normest", "max_sweeps") == 500
    assert config.get("extra", "flag") is True
    section = config.section("normest")
    section["starts"] = 99
    assert config.get("normest", "starts") == 4


def test_broken_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    assert ConfigManager(str(path)).get("search", "random_trials") == 16


def test_set_persists(isolated_config):
    config = ConfigManager()
    config.set(3, "normest", "workers")
    assert ConfigManager().get("normest", "workers") == 3


def test_session_folders(tmp_path, isolated_config):
    config = ConfigManager()
    base = tmp_path / "out"
    assert config.create_session_folder(str(base)) == str(base)
    config.set(True, "paths", "auto_create_session_folder")
    session = config.create_session_folder(str(base))
    assert os.path.basename(session).startswith("session_")
    written = config.save_session_parameters(session, {"m": "2"})
    with open(written, encoding="utf-8") as f:
        assert json.load(f)["parameters"] == {"m": "2"}
