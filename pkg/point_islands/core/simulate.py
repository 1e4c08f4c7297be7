"""Simulation drivers tying the rate equations to the integrator."""

import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from pydantic import BaseModel
from scipy.special import gammainc

from point_islands.config import IntegrationConfig, ModelParams, System, Units
from point_islands.core.integrator import Trajectory, front_position, integrate
from point_islands.core.model import (
    DimensionError,
    ReducedState,
    TruncatedState,
    as_vector,
    closed_field,
    reduced_field,
    scale_state,
    truncated_field,
)
from point_islands.observability.logging import log


def predicted_front(params: ModelParams, t: float) -> float:
    """Estimate of rho(T) from the leading monomer law.

    Integrating ``c_1 ~ (alpha / ((i + 2) T))^(1/(i+2))`` gives
    ``rho ~ ((i+2)/(i+1)) (alpha/(i+2))^(1/(i+2)) T^((i+1)/(i+2))``.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    i, alpha = params.i, float(params.alpha)
    k = i + 2
    return (k / (i + 1)) * (alpha / k) ** (1 / k) * t ** ((i + 1) / k)


def auto_n_max(params: ModelParams, t_end: float) -> int:
    """Truncation size that keeps the advected front well inside the grid."""
    rho = predicted_front(params, t_end)
    return math.ceil(1.25 * rho + params.i + 10 * math.sqrt(rho) + 20)


class FrontReport(BaseModel, frozen=True):
    front: float
    buffer: float
    n_max: int

    @property
    def adequate(self) -> bool:
        return self.front + self.buffer < self.n_max


def truncation_adequacy(trajectory: Trajectory, n_max: int, i: int) -> FrontReport:
    """Compare the final predicted front plus a diffusive buffer with ``n_max``.

    The tail spreads around the front with width of order ``sqrt(rho)``, so
    the buffer is ``5 sqrt(rho) + 5``.
    """
    front = float(front_position(trajectory, i)[-1])
    rho = float(trajectory.rho[-1])
    return FrontReport(front=front, buffer=5 * math.sqrt(rho) + 5, n_max=n_max)


def rho_time_tail(i: int, rho: float, sizes: Sequence[int]) -> np.ndarray:
    """Tail profile ``c_j / c_i`` behind a constant critical concentration.

    With ``c_i`` held fixed and an empty tail, the immobile sizes obey
    ``dc_j/drho = c_(j-1) - c_j``; the solution is the regularised lower
    incomplete gamma function ``P(j - i, rho)``.
    """
    js = np.asarray(sizes)
    if np.any(js <= i):
        raise ValueError(f"sizes must exceed i = {i}")
    if rho < 0:
        raise ValueError(f"rho must be non-negative, got {rho}")
    return np.asarray(gammainc(js - i, rho), dtype=np.float64)


def _scaled(params: ModelParams, state: TruncatedState) -> TruncatedState:
    return scale_state(params, state) if state.units is Units.PHYSICAL else state


def simulate_truncated(
    params: ModelParams,
    config: IntegrationConfig,
    initial: TruncatedState | None = None,
    n_max: int | None = None,
) -> Trajectory:
    """Integrate the truncated full system, from an empty substrate by default.

    Args:
        params: Model parameters; only the scaled rate ``alpha`` enters.
        config: Integrator settings in scaled time.
        initial: Starting state. Physical-unit states are scaled first.
        n_max: Truncation size. Defaults to the size of ``initial`` or to
            ``auto_n_max`` at ``config.t_end``.

    Raises:
        DimensionError: If ``n_max`` conflicts with ``initial`` or is below
            ``i + 2``.
    """
    if initial is not None:
        initial = _scaled(params, initial)
        if n_max is not None and n_max != initial.n_max:
            raise DimensionError(
                f"n_max={n_max} does not match initial state size {initial.n_max}"
            )
        size = initial.n_max
    else:
        size = n_max if n_max is not None else auto_n_max(params, config.t_end)
        initial = TruncatedState.empty(size)
    log.info("simulation_started", system="truncated", i=params.i, n_max=size)
    return integrate(
        truncated_field(params, size),
        initial.to_vector().astype(np.float64),
        config,
        System.TRUNCATED,
    )


def simulate_reduced(
    params: ModelParams,
    config: IntegrationConfig,
    initial: ReducedState | None = None,
) -> Trajectory:
    state = initial if initial is not None else ReducedState(c=np.zeros(params.i))
    if state.c.shape[0] != params.i:
        raise DimensionError(
            f"reduced state needs {params.i} concentrations, got {state.c.shape[0]}"
        )
    log.info("simulation_started", system="reduced", i=params.i)
    return integrate(
        reduced_field(params),
        state.to_vector().astype(np.float64),
        config,
        System.REDUCED,
    )


def simulate_closed(
    params: ModelParams,
    config: IntegrationConfig,
    initial: Sequence[Any] | np.ndarray | None = None,
) -> Trajectory:
    values = as_vector(initial) if initial is not None else np.zeros(params.i)
    if values.shape[0] != params.i:
        raise DimensionError(
            f"closed system needs {params.i} entries, got {values.shape[0]}"
        )
    log.info("simulation_started", system="closed", i=params.i)
    return integrate(
        closed_field(params), values.astype(np.float64), config, System.CLOSED
    )


def truncated_states(trajectory: Trajectory) -> list[TruncatedState]:
    """Checkpoint rows of a truncated run as states."""
    if trajectory.system is not System.TRUNCATED:
        raise ValueError(f"expected a truncated trajectory, got {trajectory.system}")
    return [
        TruncatedState.from_vector(row, float(t))
        for t, row in zip(trajectory.times, trajectory.values)
    ]


def reduced_states(trajectory: Trajectory) -> list[ReducedState]:
    if trajectory.system is not System.REDUCED:
        raise ValueError(f"expected a reduced trajectory, got {trajectory.system}")
    return [
        ReducedState.from_vector(row, float(t))
        for t, row in zip(trajectory.times, trajectory.values)
    ]
