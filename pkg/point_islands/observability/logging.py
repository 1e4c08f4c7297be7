import logging
import sys
from typing import TextIO

import structlog


def setup(level: str = "INFO", stream: TextIO | None = None) -> None:
    """Configure JSON logging.

    Args:
        level: Minimum level name, case-insensitive. Unknown names fall back
            to INFO.
        stream: Destination. Defaults to stderr so command output on stdout
            stays machine-readable.
    """
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level.upper(), logging.INFO)
        ),
        context_class=dict,
        logger_factory=lambda *_: structlog.PrintLogger(file=stream or sys.stderr),
        cache_logger_on_first_use=False,
    )


log = structlog.get_logger()
