import io
import json
import logging
import pytest

from logging_config import PerformanceProfiler, init_logging
from metrics import MetricsCollector, configure_metrics, get_metrics


@pytest.fixture
def json_stream():
    stream = io.StringIO()
    logger = init_logging(app_name="walls", log_level="DEBUG", stream=stream)
    yield stream
    logger.handlers = []


def _records(stream):
    return [json.loads(line) for line in stream.getvalue().splitlines() if line.strip()]


def test_json_logs_carry_extra_fields(json_stream):
    """Test extra fields are flattened into the JSON record"""
    logging.getLogger("walls.test").info("level classified", extra={"extra_fields": {"code": "sc2d", "walls": 2}})
    record = _records(json_stream)[-1]
    assert record["message"] == "level classified"
    assert record["level"] == "INFO"
    assert record["code"] == "sc2d"
    assert "extra_fields" not in record


def test_profiler_logs_duration_and_failures(json_stream):
    """Test the profiler times operations and reports errors"""
    logger = logging.getLogger("walls.test")
    with PerformanceProfiler(logger, "classify", code="sc2d") as prof:
        pass
    assert prof.duration is not None
    with pytest.raises(RuntimeError):
        with PerformanceProfiler(logger, "classify", code="bad"):
            raise RuntimeError("boom")
    records = _records(json_stream)
    assert records[1]["event"] == "end"
    assert records[-1]["error"] == "boom"

    @PerformanceProfiler.profile(logger)
    def work():
        return 5

    assert work() == 5
    assert _records(json_stream)[-1]["operation"] == "work"


def test_metrics_collector_counts():
    """Test counters and gauges record search activity"""
    collector = MetricsCollector(enabled=True)
    collector.record_candidates(3)
    collector.record_rejection("braiding")
    collector.record_admitted(2, 4)
    collector.record_classification("sc2d", 0.5, 2, 1)
    sample = collector.registry.get_sample_value
    assert sample("walls_candidates_checked_total") == 3.0
    assert sample("walls_rejections_total", {"axiom": "braiding"}) == 1.0
    assert sample("walls_admitted_total", {"level": "2"}) == 4.0
    assert sample("walls_group_order", {"code": "sc2d"}) == 2.0


def test_disabled_collector_records_nothing():
    """Test the default collector stays silent"""
    collector = MetricsCollector(enabled=False)
    collector.record_candidates(5)
    assert collector.registry.get_sample_value("walls_candidates_checked_total") == 0.0


def test_configure_metrics_starts_server(mocker):
    """Test enabling metrics with a port starts the exporter"""
    server = mocker.patch("metrics.start_http_server")
    collector = configure_metrics(True, 9109)
    assert get_metrics() is collector
    server.assert_called_once_with(9109, registry=collector.registry)
    configure_metrics(False)
    assert not get_metrics().enabled
