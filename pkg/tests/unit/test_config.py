from config import DEFAULTS, ConfigurationManager


def test_layers_merge(test_config):
    """Test base and environment YAML override the defaults"""
    assert test_config.env == "test"
    assert test_config.get("search.parallelism") == 3
    assert test_config.get("search.group_element_cap") == 700
    assert test_config.get("logging.level") == "INFO"
    assert test_config.get("search.candidate_cap") == DEFAULTS["search"]["candidate_cap"]
    assert test_config.get("report.schema_version") == "1.0"
    assert test_config.get("search.nonexistent", 42) == 42


def test_env_var_overrides(config_dir, monkeypatch):
    """Test environment variables win over YAML and bad values are ignored"""
    monkeypatch.setenv("WALLS_ENV", "test")
    monkeypatch.setenv("WALLS_PARALLELISM", "6")
    monkeypatch.setenv("WALLS_GROUP_CAP", "lots")
    manager = ConfigurationManager(config_dir=str(config_dir))
    assert manager.get("search.parallelism") == 6
    assert manager.get("search.group_element_cap") == 700


def test_set_and_update_clear_cache(test_config):
    """Test writes are visible to later reads"""
    assert test_config.get("search.parallelism") == 3
    test_config.set("search.parallelism", 8)
    assert test_config.get("search.parallelism") == 8
    test_config.update({"report": {"default_format": "text"}})
    assert test_config.get("report.default_format") == "text"
    assert test_config.get("report.schema_version") == "1.0"


def test_validate(test_config):
    """Test validation flags unusable values"""
    assert test_config.validate() == []
    test_config.set("search.parallelism", 0)
    test_config.set("logging.level", "LOUD")
    problems = test_config.validate()
    assert "search.parallelism must be at least 1" in problems
    assert any("LOUD" in p for p in problems)


def test_missing_directory_falls_back_to_defaults(tmp_path, monkeypatch):
    """Test an empty config directory yields the built-in defaults"""
    monkeypatch.setenv("WALLS_ENV", "production")
    for var in ("WALLS_PARALLELISM", "WALLS_LOG_LEVEL", "WALLS_GROUP_CAP"):
        monkeypatch.delenv(var, raising=False)
    manager = ConfigurationManager(config_dir=str(tmp_path))
    assert manager.get_all() == DEFAULTS


def test_malformed_yaml_is_skipped(tmp_path, monkeypatch, mocker):
    """Test a broken YAML file logs a warning and is ignored"""
    monkeypatch.setenv("WALLS_ENV", "test")
    monkeypatch.delenv("WALLS_PARALLELISM", raising=False)
    (tmp_path / "base_config.yml").write_text("search: [unclosed\n")
    warn = mocker.patch("config.logger.warning")
    manager = ConfigurationManager(config_dir=str(tmp_path))
    assert manager.get("search.parallelism") == DEFAULTS["search"]["parallelism"]
    warn.assert_called_once()
