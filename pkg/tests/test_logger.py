"""Tests for the JSON-lines analysis logger."""

import io
import json
import logging
import sys

import structlog

from harmonic_normality.analysis import roots
from harmonic_normality.utils.logger import AnalysisLogger, configure_structlog, get_logger


def _records(logger):
    with open(logger.get_log_file_path(), encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def test_events_are_json_lines(config):
    logger = get_logger(config, "tests.logger")
    logger.info("sup estimated", radius=0.9, value=1.0)
    logger.warning("rescale radius reduced", requested=1.0)
    records = _records(logger)
    assert [r["event"] for r in records[-2:]] == ["sup estimated", "rescale radius reduced"]
    assert records[-2]["radius"] == 0.9
    assert records[-1]["level"] == "warning"
    assert all(r["logger"] == "tests.logger" for r in records)
    assert "timestamp" in records[-1]


def test_debug_filtered_at_info_level(config):
    logger = AnalysisLogger(config, "tests.level")
    logger.debug("hidden")
    logger.info("shown")
    events = [r["event"] for r in _records(logger)]
    assert "hidden" not in events
    assert "shown" in events


def test_console_mirror_follows_config(config, monkeypatch):
    assert AnalysisLogger(config, "tests.quiet").logger.handlers == []
    monkeypatch.setattr(config, 'console_logging', True)
    loud = AnalysisLogger(config, "tests.loud")
    assert any(isinstance(h, logging.StreamHandler) for h in loud.logger.handlers)
    loud.close_log_file()


def test_module_loggers_write_to_run_file(config):
    logger = AnalysisLogger(config, "tests.modules")
    roots.logger.debug("cell split", half_width=0.5)
    roots.logger.info("preimages found", count=2)
    records = _records(logger)
    events = [r["event"] for r in records]
    assert "cell split" not in events
    found = [r for r in records if r["event"] == "preimages found"]
    assert found[-1]["logger"] == "harmonic_normality.analysis.roots"
    assert found[-1]["count"] == 2


def test_default_configuration_filters_below_warning(monkeypatch):
    stream = io.StringIO()
    monkeypatch.setattr(sys, "stderr", stream)
    configure_structlog(None, logging.WARNING)
    try:
        log = structlog.get_logger(logger="tests.default")
        log.info("quiet")
        log.warning("loud")
    finally:
        monkeypatch.undo()
        configure_structlog(None, logging.WARNING)
    lines = stream.getvalue().strip().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["event"] == "loud"
