import io
from collections.abc import Generator
from fractions import Fraction

import pytest
import structlog

from point_islands.config import ModelParams, build_params
from point_islands.observability import logging as logs


@pytest.fixture(autouse=True)
def _quiet_logs() -> Generator[None, None, None]:
    logs.setup("WARNING", stream=io.StringIO())
    yield
    structlog.reset_defaults()


@pytest.fixture
def log_stream() -> io.StringIO:
    stream = io.StringIO()
    logs.setup("DEBUG", stream=stream)
    return stream


@pytest.fixture
def params_i2() -> ModelParams:
    return build_params(2, 1, 1)


@pytest.fixture
def params_i3() -> ModelParams:
    return build_params(3, Fraction(16), 1)
