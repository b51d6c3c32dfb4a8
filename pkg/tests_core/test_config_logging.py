import json
import logging
from multiprocessing import cpu_count

import pytest

from core.config import DEFAULT_SETTINGS, load_settings
from core.errors import RankingParseError, SFBCError
from core.helpers import (
    batch_list,
    compare_dicts,
    iter_content_lines,
    parse_key_values,
    parse_rational,
    parse_workers,
)
from core.logger import JSONFormatter, get_logger, log_metric


def test_settings_file_loads(config):
    """Test the shipped settings file has every section"""
    settings = load_settings(use_env=False)

    assert settings["oracle"]["max_voters"] == config["oracle"]["max_voters"]
    assert settings["classification"]["reading"] in ("auto", "sfbc", "fbc")
    assert set(DEFAULT_SETTINGS) <= set(settings)


def test_missing_settings_file_falls_back_to_defaults(tmp_path):
    """Test a missing file yields the built-in defaults"""
    settings = load_settings(tmp_path / "absent.yaml", use_env=False)

    assert settings == DEFAULT_SETTINGS
    assert settings is not DEFAULT_SETTINGS


def test_partial_settings_file_is_merged(tmp_path):
    """Test nested keys merge over defaults"""
    path = tmp_path / "settings.yaml"
    path.write_text("oracle:\n  max_voters: 3\n")

    settings = load_settings(path, use_env=False)

    assert settings["oracle"]["max_voters"] == 3
    assert settings["oracle"]["chunk_size"] == DEFAULT_SETTINGS["oracle"]["chunk_size"]


def test_environment_overrides(tmp_path, monkeypatch):
    """Test SFBC_* variables override the settings file"""
    monkeypatch.setenv("SFBC_WORKERS", "3")
    monkeypatch.setenv("SFBC_LOG_JSON", "yes")
    monkeypatch.setenv("SFBC_MAX_VOTERS", "not-a-number")

    settings = load_settings(tmp_path / "absent.yaml")

    assert settings["oracle"]["workers"] == 3
    assert settings["logging"]["json_format"] is True
    assert settings["oracle"]["max_voters"] == DEFAULT_SETTINGS["oracle"]["max_voters"]


def test_auto_workers_uses_every_core(tmp_path, monkeypatch):
    """Test SFBC_WORKERS=auto resolves to the core count"""
    monkeypatch.setenv("SFBC_WORKERS", "auto")

    settings = load_settings(tmp_path / "absent.yaml")

    assert settings["oracle"]["workers"] == cpu_count()
    assert parse_workers(" AUTO ") == cpu_count()
    assert parse_workers("2") == 2


def test_json_formatter_emits_structured_record():
    """Test JSON log records carry the standard fields"""
    record = logging.LogRecord("core.oracle", logging.INFO, __file__, 10, "sweep done", None, None)
    record.extra_data = {"profiles": 21}

    data = json.loads(JSONFormatter().format(record))

    assert data["level"] == "INFO"
    assert data["logger"] == "core.oracle"
    assert data["message"] == "sweep done"
    assert data["extra"] == {"profiles": 21}


def test_get_logger_does_not_duplicate_handlers():
    """Test repeated lookups reuse the configured handler"""
    first = get_logger("tests.logger.dup")
    second = get_logger("tests.logger.dup")

    assert first is second
    assert len(second.handlers) == 1
    assert second.propagate is False


def test_log_metric_format():
    """Test metric lines are prefixed JSON"""
    logger = get_logger("tests.logger.metric")
    seen = []

    class Capture(logging.Handler):
        def emit(self, record):
            seen.append(record.getMessage())

    handler = Capture()
    logger.addHandler(handler)
    try:
        log_metric(logger, "oracle_sweep", 0, {"method": "antiplurality"})
    finally:
        logger.removeHandler(handler)

    assert seen[0].startswith("METRIC: ")
    payload = json.loads(seen[0][len("METRIC: "):])
    assert payload["metric"] == "oracle_sweep"
    assert payload["method"] == "antiplurality"


def test_parse_helpers():
    """Test rational, key=value and comment handling"""
    assert parse_rational(" -3/4 ") == -0.75
    assert parse_key_values(["Q=3/4", "depth=2"]) == {"q": "3/4", "depth": "2"}
    assert list(iter_content_lines("# c\n\n a : 1  # note\n")) == [(3, "a : 1")]
    with pytest.raises(RankingParseError):
        parse_key_values(["q=1", "q=2"], line=4)


def test_errors_are_value_errors():
    """Test the error hierarchy root"""
    error = RankingParseError("bad token", line=7, text="A>>")

    assert isinstance(error, SFBCError)
    assert isinstance(error, ValueError)
    assert str(error) == "line 7: bad token ('A>>')"
    assert error.at_line(9).line == 9
    assert str(error.at_line(9)) == "line 9: bad token ('A>>')"


def test_batch_list_is_lazy():
    """Test batching of an unbounded iterator"""
    def naturals():
        n = 0
        while True:
            yield n
            n += 1

    batches = batch_list(naturals(), 4)

    assert next(batches) == [0, 1, 2, 3]
    assert next(batches) == [4, 5, 6, 7]
    assert list(batch_list(range(5), 2)) == [[0, 1], [2, 3], [4]]


def test_compare_dicts_reports_modified_keys():
    """Test nested dictionary comparison"""
    diff = compare_dicts({"outcome": {"kind": "winner", "candidates": [0]}},
                         {"outcome": {"kind": "tie", "candidates": [0]}})

    assert diff["modified"] == {"outcome.kind": {"old": "winner", "new": "tie"}}
    assert diff["unchanged_count"] == 1
