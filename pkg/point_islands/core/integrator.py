"""Adaptive Dormand-Prince 5(4) integration with checkpoint hitting.

The state vector is extended by two quadrature components, the running
integrals rho = int c_1 dT and tau = int c_1 / (c_1^2 + eps^2) dT, so both are
integrated under the same local error control as the concentrations.
"""

import math
import time
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel

from point_islands.config import IntegrationConfig, System
from point_islands.core.model import VectorField
from point_islands.observability.logging import log
from point_islands.observability.metrics import (
    INTEGRATION_FAILURES,
    INTEGRATION_SECONDS,
    INTEGRATION_STEPS,
    RHS_EVALUATIONS,
)

# Dormand-Prince 5(4), first-same-as-last.
NODES = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
STAGES = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
WEIGHTS = STAGES[-1]
ERROR_WEIGHTS = np.array(
    [
        71 / 57600,
        0.0,
        -71 / 16695,
        71 / 1920,
        -17253 / 339200,
        22 / 525,
        -1 / 40,
    ]
)

SAFETY = 0.9
EXPONENT = 0.17
MEMORY = 0.04
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


class IntegrationError(RuntimeError):
    """Raised when an integration cannot be completed."""

    reason = "error"

    def __init__(self, message: str, time: float) -> None:
        super().__init__(f"{message} at T={time:.6g}")
        self.time = time


class StepBudgetExceeded(IntegrationError):
    """Raised when the step budget runs out before the final time."""

    reason = "step_budget"


class NegativityViolation(IntegrationError):
    """Raised when a component drops below the negativity floor."""

    reason = "negativity"


class NonFiniteState(IntegrationError):
    """Raised when a stage or the state becomes NaN or infinite."""

    reason = "non_finite"


class StepSizeUnderflow(IntegrationError):
    """Raised when the step size falls below floating-point resolution."""

    reason = "step_underflow"


class StepStats(BaseModel, frozen=True):
    """Step counts of one run.

    ``peak`` is the largest state component at any accepted step, not only at
    checkpoints.
    """

    accepted: int
    rejected: int
    rhs_evaluations: int
    min_step: float
    max_step: float
    peak: float


class Trajectory(BaseModel, frozen=True, arbitrary_types_allowed=True):
    """States at the checkpoint times plus the running integrals rho and tau.

    ``values`` holds one row per entry of ``times``; ``initial`` is the state
    the integration started from at ``T = 0``.
    """

    system: System
    times: np.ndarray
    values: np.ndarray
    rho: np.ndarray
    tau: np.ndarray
    initial: np.ndarray
    stats: StepStats

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def column(self, index: int) -> np.ndarray:
        return self.values[:, index]


def log_checkpoints(t_start: float, t_end: float, count: int) -> tuple[float, ...]:
    """Geometrically spaced output times with both endpoints exact.

    Examples:
        log_checkpoints(1, 100, 3) == (1.0, 10.0, 100.0)
    """
    if not 0 < t_start < t_end:
        raise ValueError(f"need 0 < t_start < t_end, got {t_start}, {t_end}")
    if count < 2:
        raise ValueError(f"count must be ≥ 2, got {count}")
    grid = np.geomspace(t_start, t_end, count)
    grid[0], grid[-1] = t_start, t_end
    return tuple(float(t) for t in grid)


def front_position(trajectory: Trajectory, i: int) -> np.ndarray:
    """Predicted largest populated size ``rho(T) + i`` at each checkpoint.

    In rho-time the tail is advected one size per unit of rho, starting from
    the first immobile size.
    """
    if len(trajectory) == 0:
        raise ValueError("trajectory has no checkpoints")
    return trajectory.rho + i


def _norm(vector: np.ndarray) -> float:
    return float(np.max(np.abs(vector))) if vector.size else 0.0


def _augment(field: VectorField, tau_floor: float) -> VectorField:
    eps2 = tau_floor * tau_floor

    def extended(t: float, y: np.ndarray) -> np.ndarray:
        x = y[:-2]
        c1 = x[0]
        return np.concatenate((field(t, x), (c1, c1 / (c1 * c1 + eps2))))

    return extended


def _initial_step(
    f: Callable[[float, np.ndarray], np.ndarray],
    t: float,
    y: np.ndarray,
    f0: np.ndarray,
    config: IntegrationConfig,
) -> tuple[float, int]:
    """Starting step from the size of the solution and its first two derivatives."""
    scale = config.atol + config.rtol * np.abs(y)
    d0, d1 = _norm(y / scale), _norm(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(t + h0, y + h0 * f0)
    d2 = _norm((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1), 1


class _Stepper:
    """One Dormand-Prince step with a PI-controlled proposal for the next."""

    def __init__(
        self, f: Callable[[float, np.ndarray], np.ndarray], config: IntegrationConfig
    ) -> None:
        self.f = f
        self.config = config
        self.previous_error = 1e-4
        self.evaluations = 0

    def attempt(
        self, t: float, y: np.ndarray, k1: np.ndarray, h: float
    ) -> tuple[np.ndarray, np.ndarray, float]:
        k = [k1]
        for row, node in zip(STAGES[:-1], NODES[1:-1]):
            k.append(self.f(t + node * h, y + h * (row @ np.array(k[: row.size]))))
        self.evaluations += 6
        y_new = y + h * (WEIGHTS @ np.array(k[:6]))
        k.append(self.f(t + h, y_new))
        err_vec = h * (ERROR_WEIGHTS @ np.array(k))
        magnitude = np.maximum(np.abs(y), np.abs(y_new))
        scale = self.config.atol + self.config.rtol * magnitude
        return y_new, k[-1], _norm(err_vec / scale)

    def accepted_factor(self, err: float) -> float:
        if err == 0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * err**-EXPONENT * self.previous_error**MEMORY
        self.previous_error = max(err, 1e-4)
        return min(MAX_FACTOR, max(MIN_FACTOR, factor))

    @staticmethod
    def rejected_factor(err: float) -> float:
        return max(MIN_FACTOR, SAFETY * err**-EXPONENT)


def integrate(
    field: VectorField,
    initial: np.ndarray,
    config: IntegrationConfig,
    system: System = System.TRUNCATED,
) -> Trajectory:
    """Integrate ``y' = field(T, y)`` from ``T = 0`` through every checkpoint.

    Every accepted step satisfies ``|err_j| <= atol + rtol * |y_j|`` for all
    components including rho and tau. Steps are shortened to land exactly on
    each checkpoint.

    Args:
        field: Float vector field on the state vector.
        initial: Non-negative initial state; component 0 is the monomer
            concentration feeding rho and tau.
        config: Tolerances, horizon and output schedule.
        system: Label for metrics and logs.

    Returns:
        The trajectory at ``config.schedule``.

    Raises:
        ValueError: If ``initial`` is empty, negative or does not match
            ``field``.
        IntegrationError: Any of its subclasses when the run cannot finish.
    """
    x0 = np.asarray(initial, dtype=np.float64)
    if x0.ndim != 1 or x0.size == 0:
        raise ValueError("initial state must be a non-empty vector")
    if np.any(x0 < 0):
        raise ValueError("initial state must be non-negative")
    first = np.asarray(field(0.0, x0))
    if first.shape != x0.shape:
        raise ValueError(
            f"field returns {first.shape[0]} components for a state of {x0.size}"
        )

    label = system.value
    started = time.perf_counter()
    f = _augment(field, config.tau_floor)
    y = np.concatenate((x0, (0.0, 0.0)))
    t = 0.0
    k1 = f(t, y)
    stepper = _Stepper(f, config)
    stepper.evaluations = 2
    h, extra = _initial_step(f, t, y, k1, config)
    stepper.evaluations += extra
    h = min(h, config.t_end) if config.t_end > 0 else h

    schedule = config.schedule
    rows: list[np.ndarray] = []
    accepted = rejected = 0
    min_step, max_step = math.inf, 0.0
    peak = float(np.max(x0))

    log.info(
        "integration_started",
        system=label,
        dimension=int(x0.size),
        t_end=config.t_end,
        checkpoints=len(schedule),
        rtol=config.rtol,
        atol=config.atol,
    )

    def fail(error: IntegrationError) -> IntegrationError:
        INTEGRATION_FAILURES.labels(system=label, reason=error.reason).inc()
        INTEGRATION_STEPS.labels(system=label, outcome="accepted").inc(accepted)
        INTEGRATION_STEPS.labels(system=label, outcome="rejected").inc(rejected)
        log.error(
            "integration_failed",
            system=label,
            reason=error.reason,
            error=str(error),
            accepted=accepted,
            rejected=rejected,
        )
        return error

    for target in schedule:
        while t < target:
            if accepted + rejected >= config.max_steps:
                raise fail(
                    StepBudgetExceeded(f"{config.max_steps} steps exhausted", t)
                )
            if h <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
                raise fail(StepSizeUnderflow(f"step size {h:.3g} too small", t))
            step = min(h, target - t)
            if target - (t + step) <= 1e-12 * max(abs(target), 1.0):
                step = target - t
            y_new, k_last, err = stepper.attempt(t, y, k1, step)
            if not (np.all(np.isfinite(y_new)) and math.isfinite(err)):
                raise fail(NonFiniteState("non-finite state", t + step))
            if err > 1.0:
                rejected += 1
                h = step * stepper.rejected_factor(err)
                continue
            accepted += 1
            min_step, max_step = min(min_step, step), max(max_step, step)
            factor = stepper.accepted_factor(err)
            t = target if step == target - t else t + step
            y, k1 = y_new, k_last
            peak = max(peak, float(np.max(y[:-2])))
            lowest = float(np.min(y[:-2]))
            if lowest < -config.negativity_floor:
                index = int(np.argmin(y[:-2]))
                raise fail(
                    NegativityViolation(
                        f"component {index} reached {lowest:.3g}", t
                    )
                )
            h = step * factor if step >= h else max(h, step * factor)
        rows.append(y.copy())
        log.debug("checkpoint_reached", system=label, t=t, c1=float(y[0]))

    elapsed = time.perf_counter() - started
    INTEGRATION_STEPS.labels(system=label, outcome="accepted").inc(accepted)
    INTEGRATION_STEPS.labels(system=label, outcome="rejected").inc(rejected)
    RHS_EVALUATIONS.labels(system=label).inc(stepper.evaluations)
    INTEGRATION_SECONDS.labels(system=label).observe(elapsed)
    stats = StepStats(
        accepted=accepted,
        rejected=rejected,
        rhs_evaluations=stepper.evaluations,
        min_step=min_step if accepted else 0.0,
        max_step=max_step,
        peak=peak,
    )
    log.info(
        "integration_finished",
        system=label,
        accepted=accepted,
        rejected=rejected,
        rhs_evaluations=stepper.evaluations,
        duration_ms=round(elapsed * 1000, 2),
    )
    table = np.array(rows) if rows else np.empty((0, y.size))
    return Trajectory(
        system=system,
        times=np.asarray(schedule, dtype=np.float64),
        values=table[:, :-2],
        rho=table[:, -2],
        tau=table[:, -1],
        initial=x0,
        stats=stats,
    )
