from loanbandit.telemetry.config import TelemetryHandle, bridge_logging, configure_telemetry
from loanbandit.telemetry.flush import force_flush

__all__ = ["TelemetryHandle", "bridge_logging", "configure_telemetry", "force_flush"]
