import logging

import pytest
from opentelemetry.sdk._logs import LoggerProvider, LoggingHandler
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.trace import ProxyTracerProvider

import loanbandit.telemetry.config as config_mod
from loanbandit.telemetry.config import DEFAULT_SERVICE_NAME, TelemetryHandle, _build_resource, bridge_logging


@pytest.fixture
def clean_env(monkeypatch):
    monkeypatch.delenv("OTEL_SERVICE_NAME", raising=False)
    monkeypatch.delenv("OTEL_RESOURCE_ATTRIBUTES", raising=False)


def test_resource_defaults(clean_env):
    attrs = dict(_build_resource().attributes)
    assert attrs["service.name"] == DEFAULT_SERVICE_NAME == "loanbandit"
    assert "service.version" in attrs
    assert isinstance(attrs["process.pid"], int)


def test_otel_service_name_overrides_default(clean_env, monkeypatch):
    monkeypatch.setenv("OTEL_SERVICE_NAME", "sweeps")
    assert dict(_build_resource().attributes)["service.name"] == "sweeps"


def test_resource_attributes_env_is_merged(clean_env, monkeypatch):
    monkeypatch.setenv("OTEL_RESOURCE_ATTRIBUTES", "deployment.environment=lab")
    attrs = dict(_build_resource().attributes)
    assert attrs["deployment.environment"] == "lab"
    assert attrs["service.name"] == "loanbandit"


def test_handle_holds_three_providers():
    handle = TelemetryHandle("tp", "mp", "lp")
    assert (handle.tracer_provider, handle.meter_provider, handle.logger_provider) == ("tp", "mp", "lp")


def test_build_providers_returns_sdk_types():
    resource = Resource.create({"service.name": "t"})
    tp, mp, lp = config_mod._build_providers(resource, exporter="console")
    try:
        assert isinstance(tp, TracerProvider)
        assert isinstance(mp, MeterProvider)
        assert isinstance(lp, LoggerProvider)
        assert dict(tp.resource.attributes)["service.name"] == "t"
    finally:
        tp.shutdown()
        mp.shutdown()
        lp.shutdown()


def test_configure_reuses_existing_sdk_provider(monkeypatch):
    existing = TracerProvider()
    monkeypatch.setattr(config_mod.trace, "get_tracer_provider", lambda: existing)
    set_called = []
    monkeypatch.setattr(config_mod.trace, "set_tracer_provider", set_called.append)
    handle = config_mod.configure_telemetry()
    assert handle.tracer_provider is existing
    assert set_called == []


def test_configure_sets_globals_when_unconfigured(monkeypatch):
    monkeypatch.setattr(config_mod.trace, "get_tracer_provider", lambda: ProxyTracerProvider())
    sentinels = ("TP", "MP", "LP")
    seen_exporter = []
    monkeypatch.setattr(config_mod, "_build_resource", lambda: "RES")
    monkeypatch.setattr(
        config_mod, "_build_providers", lambda resource, exporter: seen_exporter.append(exporter) or sentinels
    )
    calls = {}
    monkeypatch.setattr(config_mod.trace, "set_tracer_provider", lambda p: calls.__setitem__("tp", p))
    monkeypatch.setattr(config_mod.metrics, "set_meter_provider", lambda p: calls.__setitem__("mp", p))
    monkeypatch.setattr(config_mod, "set_logger_provider", lambda p: calls.__setitem__("lp", p))
    handle = config_mod.configure_telemetry("console")
    assert (calls["tp"], calls["mp"], calls["lp"]) == sentinels
    assert (handle.tracer_provider, handle.meter_provider, handle.logger_provider) == sentinels
    assert seen_exporter == ["console"]


def test_bridge_logging_attaches_handler():
    handle = TelemetryHandle(TracerProvider(), MeterProvider(), LoggerProvider())
    handler = bridge_logging(handle, level=logging.WARNING)
    try:
        assert isinstance(handler, LoggingHandler)
        assert handler.level == logging.WARNING
        assert handler in logging.getLogger("loanbandit").handlers
    finally:
        logging.getLogger("loanbandit").removeHandler(handler)
