"""Parameter and run configuration types."""

from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Annotated

from pydantic import BaseModel, Field, PlainSerializer, PlainValidator, model_validator

from point_islands.utils import format_rational, to_fraction

Rational = Annotated[
    Fraction,
    PlainValidator(to_fraction),
    PlainSerializer(format_rational, return_type=str),
]
"""Exact rational field: accepts int, str, float or Fraction, dumps as "p/q"."""


class ModelParams(BaseModel, frozen=True):
    """Physical parameters of the point-island rate equations.

    The dynamics depend on a single scaled rate once concentrations and time
    are measured in units of the fragmentation rate: ``c_j = C_j / beta``,
    ``T = beta * t`` and ``alpha = alpha_tilde / beta**2``.

    Args:
        i: Critical island size. Clusters of size ``i + 1`` and above are
            immobile and never fragment.
        alpha_tilde: Deposition rate in physical units.
        beta: Fragmentation rate in physical units.

    Examples:
        ModelParams(i=5, alpha_tilde=2, beta=3).alpha == Fraction(2, 9)
    """

    i: int
    alpha_tilde: Rational
    beta: Rational

    @model_validator(mode="after")
    def validate_ranges(self) -> "ModelParams":
        if self.i < 2:
            raise ValueError(f"i must be ≥ 2, got {self.i}")
        if self.alpha_tilde <= 0:
            raise ValueError(
                f"alpha_tilde must be positive, got {format_rational(self.alpha_tilde)}"
            )
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {format_rational(self.beta)}")
        return self

    @property
    def n(self) -> int:
        """Smallest immobile cluster size."""
        return self.i + 1

    @property
    def alpha(self) -> Fraction:
        """Scaled deposition rate, exact."""
        return self.alpha_tilde / (self.beta * self.beta)

    @property
    def scaled(self) -> "ModelParams":
        """The same system expressed in scaled units (beta = 1)."""
        return ModelParams(i=self.i, alpha_tilde=self.alpha, beta=Fraction(1))


def build_params(
    i: int, alpha_tilde: Fraction | int | str, beta: Fraction | int | str
) -> ModelParams:
    return ModelParams(i=i, alpha_tilde=alpha_tilde, beta=beta)


class IntegrationConfig(BaseModel, frozen=True):
    """Tolerances and output schedule for the adaptive integrator.

    Args:
        rtol: Relative tolerance of the local error test.
        atol: Absolute tolerance of the local error test.
        t_end: Final scaled time.
        checkpoints: Output times, ascending, within ``[0, t_end]``. Empty
            means a single checkpoint at ``t_end``.
        max_steps: Budget of attempted steps before giving up.
        negativity_floor: A component below ``-negativity_floor`` aborts.
        tau_floor: Regularisation of the ``1/c_1`` integrand, which diverges
            for an empty substrate at ``T = 0``.
    """

    rtol: float = 1e-8
    atol: float = 1e-12
    t_end: float = 1.0
    checkpoints: tuple[float, ...] = ()
    max_steps: int = 10_000_000
    negativity_floor: float = 1e-12
    tau_floor: float = 1e-8

    @model_validator(mode="after")
    def validate_schedule(self) -> "IntegrationConfig":
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError(
                "rtol and atol must be positive, "
                f"got rtol={self.rtol}, atol={self.atol}"
            )
        if self.t_end < 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.negativity_floor < 0 or self.tau_floor <= 0:
            raise ValueError("negativity_floor must be >= 0 and tau_floor > 0")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ValueError("checkpoints must be strictly ascending")
        if self.checkpoints and (
            self.checkpoints[0] < 0 or self.checkpoints[-1] > self.t_end
        ):
            raise ValueError(f"checkpoints must lie within [0, {self.t_end}]")
        return self

    @property
    def schedule(self) -> tuple[float, ...]:
        """Checkpoint times actually recorded."""
        return self.checkpoints or (self.t_end,)

    def with_horizon(
        self, t_end: float, checkpoints: tuple[float, ...] = ()
    ) -> "IntegrationConfig":
        return self.model_copy(update={"t_end": t_end, "checkpoints": checkpoints})


class System(str, Enum):
    """Which right-hand side a simulation integrates."""

    TRUNCATED = "truncated"
    REDUCED = "reduced"
    CLOSED = "closed"


class Units(str, Enum):
    SCALED = "scaled"
    PHYSICAL = "physical"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel, frozen=True):
    """Everything one CLI invocation needs.

    Args:
        command: Subcommand name.
        params: Model parameters. ``expand`` and ``compare`` use ``alpha`` and
            ``beta`` directly as the series parameters.
        integration: Integrator settings for ``simulate``.
        order: Series truncation order. Defaults to ``2i + 6``.
        n_max: Truncation size. Auto-sized from the predicted front when unset.
        system: System integrated by ``simulate``.
        units: Units of exported trajectories.
        output_dir: Directory receiving output files.
        output_format: Trajectory file format.
        preset: Acceptance preset for ``verify``.
        seed: Seed for randomised checks.
    """

    command: str
    params: ModelParams
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    order: int | None = None
    n_max: int | None = None
    system: System = System.TRUNCATED
    units: Units = Units.SCALED
    output_dir: Path = Path("out")
    output_format: OutputFormat = OutputFormat.CSV
    preset: str = "desk"
    seed: int = 0

    @model_validator(mode="after")
    def validate_sizes(self) -> "RunConfig":
        if self.order is not None and self.order < 2:
            raise ValueError(f"order must be ≥ 2, got {self.order}")
        if self.n_max is not None and self.n_max < self.params.i + 2:
            raise ValueError(
                f"n_max must be ≥ i + 2 = {self.params.i + 2}, got {self.n_max}"
            )
        return self

    @property
    def series_order(self) -> int:
        return self.order if self.order is not None else default_order(self.params.i)


def default_order(i: int) -> int:
    """Series order that reaches past the first CM/QSSA difference at 2i + 4."""
    return 2 * i + 6
