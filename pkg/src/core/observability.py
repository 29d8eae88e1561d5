"""OpenTelemetry observability for the quantizer library, CLI and API."""

import logging
import time
from contextlib import contextmanager
from typing import Any, Iterator

from opentelemetry import metrics, trace
from opentelemetry.exporter.prometheus import PrometheusMetricReader
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.trace import Span, Status, StatusCode

from src.core.config import settings

logger = logging.getLogger(__name__)


class ObservabilityService:
    """Tracer and meter for design, codec and simulation stages."""

    def __init__(self) -> None:
        """Initialize observability service."""
        self.tracer = trace.get_tracer(__name__)
        self.meter = metrics.get_meter(__name__)
        self._configured = False

        self.design_counter = self.meter.create_counter(
            name="lapq_designs_total",
            description="Total number of quantizer designs solved",
            unit="1",
        )

        self.blocks_encoded = self.meter.create_counter(
            name="lapq_blocks_encoded_total",
            description="Total number of symbol blocks encoded",
            unit="1",
        )

        self.code_bits = self.meter.create_counter(
            name="lapq_code_bits_total",
            description="Total number of code bits written",
            unit="1",
        )

        self.decode_errors = self.meter.create_counter(
            name="lapq_decode_errors_total",
            description="Total number of rejected LAPQ streams",
            unit="1",
        )

        self.simulation_duration = self.meter.create_histogram(
            name="lapq_simulation_duration_seconds",
            description="Duration of Monte Carlo runs in seconds",
            unit="s",
        )

    def _resource(self) -> Resource:
        return Resource.create({
            "service.name": "lapq",
            "service.version": settings.api_version,
            "deployment.environment": settings.environment,
        })

    def setup_tracing(self) -> None:
        """Setup OpenTelemetry tracing."""
        tracer_provider = TracerProvider(resource=self._resource())

        # Add OTLP exporter if configured
        if settings.otlp_endpoint:
            from opentelemetry.exporter.otlp.proto.http.trace_exporter import (
                OTLPSpanExporter,
            )

            exporter = OTLPSpanExporter(endpoint=settings.otlp_endpoint)
            tracer_provider.add_span_processor(BatchSpanProcessor(exporter))

        trace.set_tracer_provider(tracer_provider)

    def setup_metrics(self) -> None:
        """Setup OpenTelemetry metrics with a Prometheus reader."""
        meter_provider = MeterProvider(
            resource=self._resource(),
            metric_readers=[PrometheusMetricReader()],
        )
        metrics.set_meter_provider(meter_provider)

    def setup(self) -> None:
        """Install tracer and meter providers once per process."""
        if self._configured:
            return
        self.setup_tracing()
        self.setup_metrics()
        self._configured = True
        logger.info("Observability configured", extra={"extra_fields": {
            "otlp_endpoint": settings.otlp_endpoint,
        }})

    @contextmanager
    def trace_stage(self, name: str, **attributes: Any) -> Iterator[Span]:
        """Trace one pipeline stage, marking the span as failed on exceptions."""
        with self.tracer.start_as_current_span(name) as span:
            span.set_attributes(attributes)
            try:
                yield span
            except Exception as e:
                span.set_status(Status(StatusCode.ERROR, str(e)))
                raise

    @contextmanager
    def trace_simulation(self, target_sqnr_db: float, n_samples: int) -> Iterator[Span]:
        """Trace a Monte Carlo run and record its duration."""
        start_time = time.perf_counter()
        with self.trace_stage(
            "sim.run", target_sqnr_db=target_sqnr_db, n_samples=n_samples
        ) as span:
            try:
                yield span
            finally:
                duration = time.perf_counter() - start_time
                self.simulation_duration.record(duration)
                span.set_attribute("duration", duration)

    def record_design(self, method: str) -> None:
        """Record a solved design."""
        self.design_counter.add(1, {"method": method})

    def record_encode(self, block_size: int, blocks: int, bits: int) -> None:
        """Record encoder throughput."""
        labels = {"block_size": str(block_size)}
        self.blocks_encoded.add(blocks, labels)
        self.code_bits.add(bits, labels)

    def record_decode_error(self, error_type: str) -> None:
        """Record a rejected stream."""
        self.decode_errors.add(1, {"error_type": error_type})


# Global observability service
observability = ObservabilityService()


def setup_observability() -> None:
    """Setup complete observability stack."""
    observability.setup()


def get_observability_service() -> ObservabilityService:
    """Get observability service instance."""
    return observability
