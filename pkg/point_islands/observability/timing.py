import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

from point_islands.observability.logging import log
from point_islands.observability.metrics import COMMAND_SECONDS


@contextmanager
def timed(command: str, **fields: Any) -> Iterator[None]:
    """Log and record the wall time of a CLI command, also when it fails."""
    start = time.perf_counter()
    status = "ok"
    try:
        yield
    except BaseException:
        status = "error"
        raise
    finally:
        elapsed = time.perf_counter() - start
        COMMAND_SECONDS.labels(command=command).observe(elapsed)
        log.info(
            "command_finished",
            command=command,
            status=status,
            ms=round(elapsed * 1000, 2),
            **fields,
        )
