import logging
import os
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Literal

from opentelemetry import metrics, trace
from opentelemetry._logs import get_logger_provider, set_logger_provider

_INSTALL_HINT = (
    "loanbandit telemetry requires `opentelemetry-sdk` and "
    "`opentelemetry-exporter-otlp-proto-http`.\n"
    "Install them with:\n"
    "    uv add 'loanbandit[telemetry]'"
)

DEFAULT_SERVICE_NAME = "loanbandit"

Exporter = Literal["otlp", "console"]


@dataclass
class TelemetryHandle:
    """Handles to the configured providers. The providers are also registered
    globally; the handle lets callers flush them or pass them on explicitly."""

    tracer_provider: Any
    meter_provider: Any
    logger_provider: Any


def _package_version() -> str:
    try:
        return version("loanbandit")
    except PackageNotFoundError:
        return "unknown"


def _build_resource() -> Any:
    """Resource with the package defaults, overridden by OTEL_SERVICE_NAME /
    OTEL_RESOURCE_ATTRIBUTES (Resource.create merges the env detector; the
    default service.name is left out whenever OTEL_SERVICE_NAME is set so the
    env value survives)."""
    try:
        from opentelemetry.sdk.resources import Resource
    except ImportError as err:  # pragma: no cover
        raise RuntimeError(_INSTALL_HINT) from err

    attributes: dict[str, Any] = {
        "service.version": _package_version(),
        "process.pid": os.getpid(),
    }
    if "OTEL_SERVICE_NAME" not in os.environ:
        attributes["service.name"] = DEFAULT_SERVICE_NAME
    return Resource.create(attributes)


def _build_exporters(exporter: Exporter) -> tuple[Any, Any, Any]:
    try:
        if exporter == "console":
            from opentelemetry.sdk._logs.export import ConsoleLogExporter
            from opentelemetry.sdk.metrics.export import ConsoleMetricExporter
            from opentelemetry.sdk.trace.export import ConsoleSpanExporter

            return ConsoleSpanExporter(), ConsoleMetricExporter(), ConsoleLogExporter()

        from opentelemetry.exporter.otlp.proto.http._log_exporter import OTLPLogExporter
        from opentelemetry.exporter.otlp.proto.http.metric_exporter import (
            OTLPMetricExporter,
        )
        from opentelemetry.exporter.otlp.proto.http.trace_exporter import (
            OTLPSpanExporter,
        )
    except ImportError as err:
        raise RuntimeError(_INSTALL_HINT) from err
    # OTLP exporters default to OTEL_EXPORTER_OTLP_ENDPOINT or http://localhost:4318
    return OTLPSpanExporter(), OTLPMetricExporter(), OTLPLogExporter()


def _build_providers(resource: Any, exporter: Exporter = "otlp") -> tuple[Any, Any, Any]:
    try:
        from opentelemetry.sdk._logs import LoggerProvider
        from opentelemetry.sdk._logs.export import BatchLogRecordProcessor
        from opentelemetry.sdk.metrics import MeterProvider
        from opentelemetry.sdk.metrics.export import PeriodicExportingMetricReader
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor
    except ImportError as err:
        raise RuntimeError(_INSTALL_HINT) from err

    span_exporter, metric_exporter, log_exporter = _build_exporters(exporter)

    tracer_provider = TracerProvider(resource=resource)
    tracer_provider.add_span_processor(BatchSpanProcessor(span_exporter))

    meter_provider = MeterProvider(
        resource=resource,
        metric_readers=[PeriodicExportingMetricReader(metric_exporter)],
    )

    logger_provider = LoggerProvider(resource=resource)
    logger_provider.add_log_record_processor(BatchLogRecordProcessor(log_exporter))
    return tracer_provider, meter_provider, logger_provider


def configure_telemetry(exporter: Exporter = "otlp") -> TelemetryHandle:
    """Stand up an in-process SDK and register it globally, or reuse an
    already-configured global SDK TracerProvider (for callers that set up
    their own processors)."""
    try:
        from opentelemetry.sdk.trace import TracerProvider
    except ImportError as err:
        raise RuntimeError(_INSTALL_HINT) from err

    existing = trace.get_tracer_provider()
    if isinstance(existing, TracerProvider):
        return TelemetryHandle(existing, metrics.get_meter_provider(), get_logger_provider())

    resource = _build_resource()
    tracer_provider, meter_provider, logger_provider = _build_providers(resource, exporter)
    trace.set_tracer_provider(tracer_provider)
    metrics.set_meter_provider(meter_provider)
    set_logger_provider(logger_provider)
    return TelemetryHandle(tracer_provider, meter_provider, logger_provider)


def bridge_logging(handle: TelemetryHandle, level: int = logging.INFO) -> logging.Handler:
    """Forward records of the `loanbandit` logger tree to the OTel logger
    provider. Returns the attached handler."""
    try:
        from opentelemetry.sdk._logs import LoggingHandler
    except ImportError as err:  # pragma: no cover
        raise RuntimeError(_INSTALL_HINT) from err

    handler = LoggingHandler(level=level, logger_provider=handle.logger_provider)
    logging.getLogger("loanbandit").addHandler(handler)
    return handler
