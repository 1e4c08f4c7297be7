"""Export records written by the CLI. Rationals travel as ``"p/q"`` strings."""

from fractions import Fraction
from typing import Any

from pydantic import BaseModel, computed_field

from point_islands.config import ModelParams
from point_islands.core.integrator import StepStats
from point_islands.utils import format_rational


def json_number(value: Any) -> str | float:
    """Exact values as canonical strings, everything else as float."""
    if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        return format_rational(value)
    return float(value)


class ParamsRecord(BaseModel):
    i: int
    alpha_tilde: str
    beta: str
    alpha: str

    @classmethod
    def from_params(cls, params: ModelParams) -> "ParamsRecord":
        return cls(
            i=params.i,
            alpha_tilde=format_rational(params.alpha_tilde),
            beta=format_rational(params.beta),
            alpha=format_rational(params.alpha),
        )


class ExpansionRecord(BaseModel):
    kind: str
    i: int
    alpha: str
    beta: str
    order: int
    series: dict[str, list[str]]
    reduced_ode: list[str]
    reduced_ode_text: str
    # coefficient by power, in alpha and beta; only when no rates were given
    symbolic: dict[str, str] | None = None


class TrajectorySummary(BaseModel):
    params: ParamsRecord
    system: str
    units: str
    n_max: int | None
    t_end: float
    checkpoints: int
    final: dict[str, float]
    mass_residual: float | None = None
    front_position: float | None = None
    truncation_adequate: bool | None = None
    stats: StepStats


class FlowRecord(BaseModel):
    source: int
    target: int
    monomial: str
    value: str | float


class DecompositionRecord(BaseModel):
    i: int
    alpha: str
    state: list[str | float]
    inputs: list[str | float]
    flows: list[FlowRecord]
    outflows: list[str | float]
    reconstructed: list[str | float]
    rhs: list[str | float]
    identity_holds: bool
    monotone: bool


class CriterionResult(BaseModel):
    name: str
    passed: bool
    measured: float | str | None = None
    tolerance: float | str | None = None
    detail: str = ""


class VerifyReport(BaseModel):
    preset: str
    criteria: list[CriterionResult]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.criteria if not c.passed]
