import functools
import time
import typing

try:
    from opentelemetry.trace import Span, SpanKind
    from opentelemetry.trace.status import Status, StatusCode
except ImportError as err:  # pragma: no cover
    raise RuntimeError(
        "loanbandit telemetry requires the `opentelemetry-sdk` package.\n"
        "You can install this with:\n"
        "    uv add 'loanbandit[telemetry]'"
    ) from err

from loanbandit.config import ExperimentConfig
from loanbandit.telemetry.attributes import (
    RunAttribute,
    get_result_attribute,
    get_run_attribute,
)
from loanbandit.telemetry.flush import force_flush

if typing.TYPE_CHECKING:
    from loanbandit.harness.runner import RunContext, RunResult
    from loanbandit.telemetry.config import TelemetryHandle


class TelemetryMiddleware:
    """Wraps a per-seed run callable `(cfg, seed, context) -> RunResult` with a
    span and run metrics."""

    def __init__(
        self,
        next_call: typing.Callable,
        handle: "TelemetryHandle",
        run_hook: typing.Callable[[Span, ExperimentConfig, int], None] | None = None,
        result_hook: typing.Callable[[Span, "RunResult | None"], None] | None = None,
    ) -> None:
        self.next_call = next_call
        self.handle = handle
        self.run_hook = run_hook
        self.result_hook = result_hook
        functools.update_wrapper(self, next_call, updated=())

        meter = handle.meter_provider.get_meter(__name__)
        self.tracer = handle.tracer_provider.get_tracer(__name__)
        self.run_duration = meter.create_histogram(
            name="loanbandit.run.duration",
            unit="s",
            description="Wall-clock duration of one seeded run.",
        )
        self.run_regret = meter.create_histogram(
            name="loanbandit.run.cumulative_regret",
            unit="1",
            description="Cumulative regret at the end of a run.",
        )

    def __call__(self, cfg: ExperimentConfig, seed: int, context: "RunContext") -> "RunResult":
        start = time.perf_counter()
        attribute = get_run_attribute(cfg, seed)

        exception: Exception | None = None
        result: RunResult | None = None
        with self.tracer.start_as_current_span(
            attribute.span_name,
            kind=SpanKind.INTERNAL,
            attributes=attribute.attributes,
        ) as span:
            if self.run_hook:
                self.run_hook(span, cfg, seed)

            try:
                result = self.next_call(cfg, seed, context)
            except Exception as exc:
                span.set_status(Status(StatusCode.ERROR))
                span.record_exception(exc)
                exception = exc
            else:
                span.set_attributes(get_result_attribute(result))

            if self.result_hook:
                self.result_hook(span, result)

        self._record_metric(attribute, result, time.perf_counter() - start)
        force_flush(self.handle)

        if exception:
            raise exception.with_traceback(exception.__traceback__)

        return result

    def _record_metric(
        self, attribute: RunAttribute, result: "RunResult | None", duration_s: float
    ) -> None:
        labels = {
            "loanbandit.dataset": attribute.dataset,
            "loanbandit.algo": attribute.algo,
            "loanbandit.outcome": "ok" if result is not None else "error",
        }
        self.run_duration.record(duration_s, labels)
        if result is not None:
            self.run_regret.record(float(result.cumulative_regret[-1]), labels)
