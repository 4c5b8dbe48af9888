from typing import Optional

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, Info, start_http_server

ENGINE_VERSION = '1.0.0'


class MetricsCollector:
    """Prometheus instrumentation for the wall search; a disabled collector records nothing."""

    def __init__(self, enabled: bool = True, registry: Optional[CollectorRegistry] = None):
        self.enabled = enabled
        self.registry = registry or CollectorRegistry()

        # Search metrics
        self.candidates_checked = Counter(
            'walls_candidates_checked_total',
            'Candidate wall actions checked',
            registry=self.registry
        )
        self.walls_admitted = Counter(
            'walls_admitted_total',
            'Admissible domain walls found',
            ['level'],
            registry=self.registry
        )
        self.rejections = Counter(
            'walls_rejections_total',
            'Rejected candidates by failing axiom',
            ['axiom'],
            registry=self.registry
        )
        self.classification_latency = Histogram(
            'walls_classification_latency_seconds',
            'Classification latency in seconds',
            ['code'],
            buckets=[0.01, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0, 600.0],
            registry=self.registry
        )

        # Result metrics
        self.group_order = Gauge(
            'walls_group_order',
            'Order of the enumerated Clifford wall group',
            ['code'],
            registry=self.registry
        )
        self.gate_generators = Gauge(
            'walls_gate_generators',
            'Number of independent logical gate generators',
            ['code'],
            registry=self.registry
        )

        self.info = Info('walls_engine', 'Domain-wall engine build information', registry=self.registry)
        self.info.info({'version': ENGINE_VERSION})

    def start_server(self, port: int):
        """Expose the registry over HTTP"""
        if self.enabled:
            start_http_server(port, registry=self.registry)

    def record_candidates(self, count: int = 1):
        if self.enabled and count:
            self.candidates_checked.inc(count)

    def record_rejection(self, axiom: str):
        if self.enabled:
            self.rejections.labels(axiom=axiom).inc()

    def record_admitted(self, level: int, count: int = 1):
        if self.enabled and count:
            self.walls_admitted.labels(level=str(level)).inc(count)

    def record_classification(self, code: str, latency: float, order: Optional[int], gate_count: int):
        """Record result metrics for one classified code"""
        if not self.enabled:
            return
        self.classification_latency.labels(code=code).observe(latency)
        if order is not None:
            self.group_order.labels(code=code).set(order)
        self.gate_generators.labels(code=code).set(gate_count)


_collector: Optional[MetricsCollector] = None


def get_metrics() -> MetricsCollector:
    """Process-wide collector; disabled until ``configure_metrics`` enables it."""
    global _collector
    if _collector is None:
        _collector = MetricsCollector(enabled=False)
    return _collector


def configure_metrics(enabled: bool, port: Optional[int] = None) -> MetricsCollector:
    global _collector
    _collector = MetricsCollector(enabled=enabled)
    if enabled and port:
        _collector.start_server(port)
    return _collector
