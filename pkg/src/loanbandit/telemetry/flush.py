import logging
import time
import typing

if typing.TYPE_CHECKING:
    from loanbandit.telemetry.config import TelemetryHandle

logger = logging.getLogger(__name__)

SIGNALS = ("tracer_provider", "meter_provider", "logger_provider")


def force_flush(handle: "TelemetryHandle", timeout_millis: int = 3000) -> list[str]:
    """Flush every signal of `handle` within one shared time budget.

    Returns the signals whose provider reported a successful flush. Export
    failures are logged at debug level and swallowed, so an unreachable
    collector cannot fail a sweep.
    """
    deadline = time.perf_counter() + timeout_millis / 1000
    flushed = []
    for signal in SIGNALS:
        flush = getattr(getattr(handle, signal), "force_flush", None)
        if flush is None:
            continue
        budget_ms = int((deadline - time.perf_counter()) * 1000)
        if budget_ms <= 0:
            logger.debug("flush budget exhausted", extra={"signal": signal})
            break
        try:
            ok = flush(budget_ms)
        except Exception:
            logger.debug("flush failed", extra={"signal": signal}, exc_info=True)
            continue
        if ok is not False:
            flushed.append(signal)
    return flushed
