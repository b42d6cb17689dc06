"""
Phase logging with run ids and timing.
"""
import logging
import time
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)


def new_run_id() -> str:
    return str(uuid.uuid4())[:8]


@dataclass
class PhaseTrace:
    run_id: str
    phase: str
    started: float = field(default_factory=time.perf_counter)
    duration_ms: float = 0.0


@contextmanager
def trace_phase(phase: str, run_id: str | None = None, **context):
    """
    Log the start and end of one protocol or tally phase.
    """
    trace = PhaseTrace(run_id=run_id or new_run_id(), phase=phase)

    logger.info(
        f"Phase [{trace.run_id}]: {phase} started",
        extra={"run_id": trace.run_id, "phase": phase, **context},
    )
    try:
        yield trace
    finally:
        trace.duration_ms = (time.perf_counter() - trace.started) * 1000
        logger.info(
            f"Phase [{trace.run_id}]: {phase} finished ({trace.duration_ms:.2f}ms)",
            extra={
                "run_id": trace.run_id,
                "phase": phase,
                "duration_ms": trace.duration_ms,
                **context,
            },
        )


class RunContextFilter(logging.Filter):
    """Give every record run_id, phase and duration_ms so formatters can rely on them."""

    defaults = {"run_id": "-", "phase": "-", "duration_ms": ""}

    def filter(self, record: logging.LogRecord) -> bool:
        for name, value in self.defaults.items():
            if not hasattr(record, name):
                setattr(record, name, value)
        return True
