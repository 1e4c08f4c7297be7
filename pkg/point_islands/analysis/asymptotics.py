"""Leading large-time laws, the similarity profile and power-law fits."""

from collections.abc import Sequence
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np
from pydantic import BaseModel, computed_field

from point_islands.config import ModelParams, Rational, Units
from point_islands.core.integrator import Trajectory
from point_islands.core.model import TruncatedState
from point_islands.series.centre_manifold import CentreManifoldExpansion


class InsufficientDataError(ValueError):
    """Raised when a fit window holds too few points or non-positive values."""


class Quantity(str, Enum):
    MONOMER = "monomer"
    SUBCRITICAL = "subcritical"
    IMMOBILE = "immobile"
    MEAN_SIZE = "mean_size"


class AsymptoticLaw(BaseModel, frozen=True):
    """``value ~ amplitude * t**exponent`` as ``t`` grows.

    ``power`` is the exact rational power applied to the rate inside the
    law, so exponent identities can be checked without rounding.
    """

    quantity: Quantity
    j: int | None = None
    units: Units
    exponent: Rational
    power: Rational
    amplitude: float

    def evaluate(self, t: float | np.ndarray) -> Any:
        return self.amplitude * np.power(t, float(self.exponent))


def leading_law(
    params: ModelParams,
    quantity: Quantity,
    j: int | None = None,
    units: Units = Units.PHYSICAL,
) -> AsymptoticLaw:
    """Leading large-time law of a concentration or of the mean cluster size.

    Args:
        params: Model parameters.
        quantity: Which law.
        j: Cluster size, required for ``SUBCRITICAL`` (``1 < j <= i``) and
            ``IMMOBILE`` (``j > i``).
        units: ``PHYSICAL`` gives ``C_j(t)``; ``SCALED`` gives ``c_j(T)``.

    Raises:
        ValueError: If ``j`` is missing or outside the branch's range.
    """
    i = params.i
    p = params if units is Units.PHYSICAL else params.scaled
    a, b = float(p.alpha_tilde), float(p.beta)
    k = i + 2
    if quantity is Quantity.MONOMER:
        power, rate = Fraction(1, k), a * b ** (i - 1) / k
        exponent = -power
    elif quantity is Quantity.SUBCRITICAL:
        if j is None or not 1 < j <= i:
            raise ValueError(f"subcritical law needs 1 < j ≤ {i}, got j={j}")
        power, rate = Fraction(j, k), a * b ** ((i - 3 * j + 2) / j) / k
        exponent = -power
    elif quantity is Quantity.IMMOBILE:
        if j is None or j <= i:
            raise ValueError(f"immobile law needs j > {i}, got j={j}")
        power, rate = Fraction(i, k), a * b ** ((2 - 2 * i) / i) / k
        exponent = -power
    else:
        power, rate = Fraction(1, k), a * b ** (i - 1) / k
        exponent = Fraction(i + 1, k)
    return AsymptoticLaw(
        quantity=quantity,
        j=j,
        units=units,
        exponent=exponent,
        power=power,
        amplitude=rate ** float(power),
    )


def psi(i: int, r: float | np.ndarray) -> Any:
    """Similarity profile ``(1 - r)^(-i/(i+1))`` for ``r < 1``, zero beyond."""
    if i < 2:
        raise ValueError(f"i must be ≥ 2, got {i}")
    x = np.asarray(r, dtype=np.float64)
    inside = x < 1
    out = np.where(inside, np.where(inside, 1 - x, 1.0) ** (-i / (i + 1)), 0.0)
    return float(out) if out.ndim == 0 else out


def eta(params: ModelParams, j: float | np.ndarray, mean_size: float) -> Any:
    """Similarity variable ``((i+1)/(i+2)) beta^(-(i+1)/(i+2)) j / <j>``."""
    if mean_size <= 0:
        raise ValueError(f"mean_size must be positive, got {mean_size}")
    i = params.i
    prefactor = (i + 1) / (i + 2) * float(params.beta) ** (-(i + 1) / (i + 2))
    return prefactor * np.asarray(j, dtype=np.float64) / mean_size


def similarity_constant(params: ModelParams) -> float:
    """Scale of ``<j>^(i/(i+1)) c_j`` along the profile, in scaled units."""
    i = params.i
    return (float(params.alpha) / (i + 2)) ** (i / (i + 1))


class SimilaritySnapshot(BaseModel, frozen=True, arbitrary_types_allowed=True):
    """Concentrations of one state in similarity coordinates (scaled units)."""

    time: float
    i: int
    mean_size: float
    kappa: float
    sizes: np.ndarray
    eta: np.ndarray
    concentrations: np.ndarray
    scaled: np.ndarray

    @property
    def normalised(self) -> np.ndarray:
        return self.scaled / self.kappa

    @property
    def profile(self) -> np.ndarray:
        return np.asarray(psi(self.i, self.eta))


def similarity_snapshot(
    params: ModelParams, state: TruncatedState, time: float | None = None
) -> SimilaritySnapshot:
    """Empirical ``<j>``, the eta grid and ``<j>^(i/(i+1)) c_j`` for ``state``.

    ``<j>`` counts the overflow in both mass and number.

    Raises:
        ValueError: If the state holds no clusters.
    """
    c = np.asarray(state.c, dtype=np.float64)
    sizes = np.arange(1, c.shape[0] + 1)
    number = float(c.sum()) + float(state.overflow_count)
    if number <= 0:
        raise ValueError("state holds no clusters")
    mean_size = (float(sizes @ c) + float(state.overflow_mass)) / number
    i = params.i
    return SimilaritySnapshot(
        time=float(state.time if time is None else time),
        i=i,
        mean_size=mean_size,
        kappa=similarity_constant(params),
        sizes=sizes,
        eta=eta(params.scaled, sizes, mean_size),
        concentrations=c,
        scaled=mean_size ** (i / (i + 1)) * c,
    )


def profile_deviation(
    snapshot: SimilaritySnapshot, window: tuple[float, float] = (0.1, 0.8)
) -> float:
    """Largest relative deviation of the normalised profile from psi on a window."""
    lo, hi = window
    mask = (snapshot.eta >= lo) & (snapshot.eta <= hi)
    if not np.any(mask):
        raise InsufficientDataError(f"no sizes with eta in [{lo}, {hi}]")
    target = snapshot.profile[mask]
    return float(np.max(np.abs(snapshot.normalised[mask] - target) / target))


class PowerLawFit(BaseModel, frozen=True):
    slope: float
    intercept: float
    points: int

    @computed_field  # type: ignore[prop-decorator]
    @property
    def amplitude(self) -> float:
        return float(np.exp(self.intercept))


def _log_data(
    times: Sequence[float] | np.ndarray,
    values: Sequence[float] | np.ndarray,
    minimum: int,
) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.shape != v.shape:
        raise InsufficientDataError(f"{t.size} times for {v.size} values")
    if t.size < minimum:
        raise InsufficientDataError(f"need at least {minimum} points, got {t.size}")
    if np.any(t <= 0) or np.any(v <= 0):
        raise InsufficientDataError("log-log fits need positive times and values")
    return np.log(t), np.log(v)


def fit_power_law(
    times: Sequence[float] | np.ndarray,
    values: Sequence[float] | np.ndarray,
    minimum: int = 2,
) -> PowerLawFit:
    """Least-squares line through ``(ln t, ln value)``."""
    log_t, log_v = _log_data(times, values, minimum)
    slope, intercept = np.polyfit(log_t, log_v, 1)
    return PowerLawFit(
        slope=float(slope), intercept=float(intercept), points=log_t.size
    )


def _window(
    trajectory: Trajectory, component: int, window: tuple[float, float]
) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = window
    mask = (trajectory.times >= lo) & (trajectory.times <= hi)
    return trajectory.times[mask], trajectory.values[mask, component]


def slope_fit(
    trajectory: Trajectory, component: int, window: tuple[float, float]
) -> PowerLawFit:
    """Power-law fit of one state component over checkpoints in ``window``.

    Raises:
        InsufficientDataError: Fewer than 5 checkpoints in the window, or a
            non-positive value.
    """
    times, values = _window(trajectory, component, window)
    return fit_power_law(times, values, minimum=5)


def fixed_exponent_amplitude(
    trajectory: Trajectory,
    component: int,
    window: tuple[float, float],
    exponent: float | Fraction,
) -> float:
    """Amplitude of ``A t^exponent`` fitted with the exponent held fixed.

    The fit is the geometric mean of ``value / t^exponent`` over the window.
    """
    times, values = _window(trajectory, component, window)
    log_t, log_v = _log_data(times, values, 1)
    return float(np.exp(np.mean(log_v - float(exponent) * log_t)))


def cluster_ratios(values: Sequence[Any] | np.ndarray, i: int) -> tuple[float, ...]:
    """``c_j / c_1^j`` for ``2 <= j <= i``."""
    c = np.asarray(values, dtype=np.float64)
    if c[0] <= 0:
        raise ValueError("c1 must be positive")
    return tuple(float(c[j - 1] / c[0] ** j) for j in range(2, i + 1))


def cm_distance(
    values: Sequence[Any] | np.ndarray, expansion: CentreManifoldExpansion
) -> tuple[float, ...]:
    """``|c_j - g_j(c1)| / c1^j`` for ``2 <= j <= i``.

    Raises:
        ValueError: If ``c1`` is zero or there are fewer than ``i`` values.
    """
    c = np.asarray(values, dtype=np.float64)
    i = expansion.i
    if c.shape[0] < i:
        raise ValueError(f"need c1..c{i}, got {c.shape[0]} values")
    c1 = float(c[0])
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    return tuple(
        abs(float(c[j - 1]) - float(expansion.g[j].evaluate(c1))) / c1**j
        for j in range(2, i + 1)
    )
