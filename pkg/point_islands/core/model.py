"""State types and exact right-hand sides of the point-island rate equations.

Everything here works in scaled variables (beta = 1). The same code serves
two backends: float64 arrays for integration and object arrays of Fractions
for exact identity checks.
"""

from collections.abc import Callable, Sequence
from fractions import Fraction
from typing import Any, NamedTuple, Union

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from point_islands.config import ModelParams, Units

Number = Union[float, Fraction]
VectorField = Callable[[float, np.ndarray], np.ndarray]

# n + 1 for the smallest critical size i = 2; rhs_truncated checks i + 2 per model
MIN_N_MAX = 4


class DimensionError(ValueError):
    """Raised when a state vector does not fit the system it is evaluated against."""


def as_vector(values: Sequence[Any] | np.ndarray) -> np.ndarray:
    """Float64 array, or an object array when any entry is a Fraction."""
    if isinstance(values, np.ndarray) and values.dtype != object:
        return values.astype(np.float64, copy=False)
    items = list(values)
    if any(isinstance(x, Fraction) for x in items):
        return np.array([Fraction(x) for x in items], dtype=object)
    return np.asarray(items, dtype=np.float64)


def is_exact(vector: np.ndarray) -> bool:
    return vector.dtype == object


def _scalar(value: Fraction, like: np.ndarray) -> Number:
    return value if is_exact(like) else float(value)


class TruncatedState(BaseModel, frozen=True, arbitrary_types_allowed=True):
    """Concentrations c_1..c_N of the truncated system plus overflow bookkeeping.

    Clusters growing past N are absorbed into ``overflow_count`` (number) and
    ``overflow_mass`` (mass), so mass stays exactly accounted for. Overflow
    defaults are Fractions when ``c`` is exact.
    """

    c: np.ndarray
    overflow_count: Number = 0.0
    overflow_mass: Number = 0.0
    time: Number = 0.0
    units: Units = Units.SCALED

    @field_validator("c", mode="before")
    @classmethod
    def coerce_vector(cls, value: Any) -> np.ndarray:
        vector = as_vector(value)
        if vector.ndim != 1:
            raise ValueError(f"c must be one-dimensional, got shape {vector.shape}")
        return vector

    @model_validator(mode="before")
    @classmethod
    def match_exactness(cls, data: Any) -> Any:
        if isinstance(data, dict) and "c" in data and is_exact(as_vector(data["c"])):
            return {"overflow_count": Fraction(0), "overflow_mass": Fraction(0), **data}
        return data

    @model_validator(mode="after")
    def check_invariants(self) -> "TruncatedState":
        if self.c.shape[0] < MIN_N_MAX:
            raise ValueError(f"N_max must be ≥ {MIN_N_MAX}, got {self.c.shape[0]}")
        if np.any(self.c < 0):
            index = int(np.argmax(self.c < 0))
            raise ValueError(f"c_{index + 1} is negative: {self.c[index]}")
        if self.overflow_count < 0 or self.overflow_mass < 0:
            raise ValueError("overflow accumulators must be non-negative")
        return self

    @property
    def n_max(self) -> int:
        return int(self.c.shape[0])

    @classmethod
    def empty(cls, n_max: int) -> "TruncatedState":
        return cls(c=np.zeros(n_max))

    def to_vector(self) -> np.ndarray:
        extra = [self.overflow_count, self.overflow_mass]
        if is_exact(self.c):
            return np.array([*self.c, *map(Fraction, extra)], dtype=object)
        return np.concatenate((self.c, np.asarray(extra, dtype=np.float64)))

    @classmethod
    def from_vector(cls, vector: np.ndarray, time: Number) -> "TruncatedState":
        """State from an integrator row; float undershoot within the floor is zeroed."""
        if not is_exact(vector):
            vector = np.maximum(vector, 0.0)
        return cls(
            c=vector[:-2].copy(),
            overflow_count=vector[-2],
            overflow_mass=vector[-1],
            time=time,
        )


class ReducedState(BaseModel, frozen=True, arbitrary_types_allowed=True):
    """Concentrations c_1..c_i plus the tail sum y of all immobile clusters."""

    c: np.ndarray
    y: Number = 0.0
    time: Number = 0.0

    @field_validator("c", mode="before")
    @classmethod
    def coerce_vector(cls, value: Any) -> np.ndarray:
        return as_vector(value)

    def to_vector(self) -> np.ndarray:
        if is_exact(self.c):
            return np.array([*self.c, Fraction(self.y)], dtype=object)
        return np.append(self.c, float(self.y))

    @classmethod
    def from_vector(cls, vector: np.ndarray, time: Number) -> "ReducedState":
        return cls(c=vector[:-1].copy(), y=vector[-1], time=time)


class Observables(BaseModel, frozen=True, arbitrary_types_allowed=True):
    """Derived totals of a truncated state (scaled units).

    ``tail_number`` counts every cluster of size two or more, including the
    overflow, so that ``v = alpha - c1 * tail_number`` is exact.
    """

    mass: Number
    number: Number
    tail_number: Number
    v: Number
    w: Number
    tail_rate: Number


class TruncatedRates(NamedTuple):
    c: np.ndarray
    overflow_count: Number
    overflow_mass: Number


def _rates(alpha: Number, i: int, c: np.ndarray, tail: Number) -> np.ndarray:
    """Coagulation-fragmentation rates for c_1..c_len(c).

    ``tail`` is the number of clusters of size two or more seen by monomers.
    Sizes above ``i`` only grow; a vector of length ``i`` is the closed chain.
    """
    c1 = c[0]
    d = np.zeros_like(c)
    d[1:] = c1 * (c[:-1] - c[1:])
    d[1:i] -= c[1:i]
    d[1 : i - 1] += c[2:i]
    d[0] = alpha - 2 * c1 * c1 + 2 * c[1] - c1 * tail + c[2:i].sum()
    return d


def rhs_truncated(params: ModelParams, state: TruncatedState) -> TruncatedRates:
    """Right-hand side of the truncated full system at ``state``.

    Raises:
        DimensionError: If ``state`` holds fewer than ``i + 2`` sizes.
    """
    i, c = params.i, state.c
    if c.shape[0] < i + 2:
        raise DimensionError(f"N_max must be ≥ i + 2 = {i + 2}, got {c.shape[0]}")
    alpha = _scalar(params.alpha, c)
    flux = c[0] * c[-1]
    return TruncatedRates(
        c=_rates(alpha, i, c, c[1:].sum()),
        overflow_count=flux,
        overflow_mass=(c.shape[0] + 1) * flux,
    )


def rhs_reduced(params: ModelParams, state: ReducedState) -> np.ndarray:
    """Right-hand side ``(c_1', ..., c_i', y')`` of the reduced system.

    Raises:
        DimensionError: If ``state.c`` does not hold exactly ``i`` entries.
    """
    i, c = params.i, state.c
    if c.shape[0] != i:
        raise DimensionError(
            f"reduced state needs {i} concentrations, got {c.shape[0]}"
        )
    alpha = _scalar(params.alpha, c)
    y = Fraction(state.y) if is_exact(c) else float(state.y)
    d = _rates(alpha, i, c, c[1:].sum() + y)
    growth = c[0] * c[-1]
    if is_exact(c):
        return np.array([*d, growth], dtype=object)
    return np.append(d, growth)


def rhs_closed(params: ModelParams, values: Sequence[Any] | np.ndarray) -> np.ndarray:
    """Right-hand side of the chain c_1..c_i with the immobile tail removed."""
    c = as_vector(values)
    if c.shape[0] != params.i:
        raise DimensionError(
            f"closed system needs {params.i} entries, got {c.shape[0]}"
        )
    return _rates(_scalar(params.alpha, c), params.i, c, c[1:].sum())


def observables(params: ModelParams, state: TruncatedState) -> Observables:
    c = state.c
    sizes = np.arange(1, c.shape[0] + 1)
    if is_exact(c):
        sizes = sizes.astype(object)
    alpha = _scalar(params.alpha, c)
    c1 = c[0]
    tail_number = c[1:].sum() + state.overflow_count
    v = alpha - c1 * tail_number
    return Observables(
        mass=(sizes * c).sum() + state.overflow_mass,
        number=c.sum() + state.overflow_count,
        tail_number=tail_number,
        v=v,
        w=v + 2 * c[1] + c[2 : params.i].sum(),
        tail_rate=c1 * c1 - c[1],
    )


def reduced_v(params: ModelParams, state: ReducedState) -> Number:
    """Deposition excess ``alpha - c1 (c_2 + ... + c_i + y)`` of a reduced state."""
    c = state.c
    return _scalar(params.alpha, c) - c[0] * (c[1:].sum() + state.y)


def truncated_field(params: ModelParams, n_max: int) -> VectorField:
    """Float vector field on ``[c_1..c_N, overflow_count, overflow_mass]``."""
    if n_max < params.i + 2:
        raise DimensionError(f"N_max must be ≥ i + 2 = {params.i + 2}, got {n_max}")
    alpha, i = float(params.alpha), params.i

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        c = y[:n_max]
        flux = c[0] * c[-1]
        return np.concatenate(
            (_rates(alpha, i, c, c[1:].sum()), (flux, (n_max + 1) * flux))
        )

    return field


def reduced_field(params: ModelParams) -> VectorField:
    """Float vector field on ``[c_1..c_i, y]``."""
    alpha, i = float(params.alpha), params.i

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        c = y[:i]
        return np.append(_rates(alpha, i, c, c[1:].sum() + y[i]), c[0] * c[-1])

    return field


def closed_field(params: ModelParams) -> VectorField:
    alpha, i = float(params.alpha), params.i

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        return _rates(alpha, i, y, y[1:].sum())

    return field


def _convert(
    params: ModelParams, state: TruncatedState, factor: Fraction, target: Units
) -> TruncatedState:
    scale: Number = _scalar(factor, state.c)
    time_scale: Number = _scalar(1 / factor, state.c)
    return TruncatedState(
        c=state.c * scale,
        overflow_count=state.overflow_count * scale,
        overflow_mass=state.overflow_mass * scale,
        time=state.time * time_scale,
        units=target,
    )


def unscale_state(params: ModelParams, state: TruncatedState) -> TruncatedState:
    """Scaled to physical units: ``C_j = beta c_j``, ``t = T / beta``."""
    if state.units is Units.PHYSICAL:
        raise ValueError("state is already in physical units")
    return _convert(params, state, params.beta, Units.PHYSICAL)


def scale_state(params: ModelParams, state: TruncatedState) -> TruncatedState:
    """Physical to scaled units: ``c_j = C_j / beta``, ``T = beta t``."""
    if state.units is Units.SCALED:
        raise ValueError("state is already in scaled units")
    return _convert(params, state, 1 / params.beta, Units.SCALED)


def convert_units(
    params: ModelParams, state: TruncatedState, target: Units
) -> TruncatedState:
    if state.units is target:
        return state
    if target is Units.PHYSICAL:
        return unscale_state(params, state)
    return scale_state(params, state)
