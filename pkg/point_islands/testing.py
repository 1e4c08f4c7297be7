"""Reference values and independent oracles for tests and the verify suite."""

import random
from collections.abc import Callable
from fractions import Fraction

import numpy as np

from point_islands.series.truncated import TruncatedSeries
from point_islands.utils import to_fraction


def reference_reduced_ode(
    alpha: Fraction | int | str, beta: Fraction | int | str
) -> dict[int, Fraction]:
    """Reduced c1 flow for i = 5 at powers 8..15 (zeros included)."""
    a, b = to_fraction(alpha), to_fraction(beta)
    coeffs = {k: Fraction(0) for k in range(8, 16)}
    coeffs[8] = -1 / (a * b**4)
    coeffs[9] = 1 / (a * b**5)
    coeffs[13] = -1 / (a * b**9)
    coeffs[14] = (30 * b**2 + a) / (a**2 * b**10)
    coeffs[15] = -80 / (a**2 * b**9)
    return coeffs


def gj_pattern(i: int, j: int, order: int) -> TruncatedSeries:
    """``c1^j - c1^(i+1) + c1^(i+j)``.

    Reliable through ``i + j + 1``, or ``2i`` when ``j = i``.
    """
    coeffs = [Fraction(0)] * (order + 1)
    for power, sign in ((j, 1), (i + 1, -1), (i + j, 1)):
        if power <= order:
            coeffs[power] += sign
    return TruncatedSeries(coeffs, order)


def gw_pattern(i: int, alpha: Fraction | int | str, order: int) -> TruncatedSeries:
    """``2 c1^2 + (-c1^(i+3) + c1^(i+4) - c1^(2i+3)) / alpha`` through ``2i + 3``."""
    a = to_fraction(alpha)
    coeffs = [Fraction(0)] * (order + 1)
    for power, value in ((2, Fraction(2)), (i + 3, -1 / a), (i + 4, 1 / a)):
        if power <= order:
            coeffs[power] += value
    if 2 * i + 3 <= order:
        coeffs[2 * i + 3] -= 1 / a
    return TruncatedSeries(coeffs, order)


def qssa_gw_pattern(
    i: int, alpha: Fraction | int | str, order: int
) -> TruncatedSeries:
    """``2 c1^2 + (1/alpha) sum_k (-c1^(ki+3) + c1^(ki+4))``."""
    a = to_fraction(alpha)
    coeffs = [Fraction(0)] * (order + 1)
    coeffs[2] = Fraction(2)
    k = 1
    while k * i + 3 <= order:
        coeffs[k * i + 3] -= 1 / a
        if k * i + 4 <= order:
            coeffs[k * i + 4] += 1 / a
        k += 1
    return TruncatedSeries(coeffs, order)


def number_rate(alpha: Fraction, i: int, c: list[Fraction]) -> Fraction:
    """``alpha - c1^2 - c1 z + c2 + c3 + ... + ci`` summed term by term."""
    c1 = c[0]
    z = sum(c[1:], Fraction(0))
    rate = alpha - c1 * c1 - c1 * z + c[1]
    for k in range(3, i + 1):
        rate += c[k - 1]
    return rate


def random_rational_state(
    rng: random.Random, size: int, denominator: int = 7, top: int = 5
) -> list[Fraction]:
    return [
        Fraction(rng.randint(0, top * denominator), rng.randint(1, denominator))
        for _ in range(size)
    ]


def fixed_step_rk4(
    field: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_end: float,
    step: float,
) -> np.ndarray:
    """Classical fourth-order Runge-Kutta with a constant step."""
    y = np.asarray(y0, dtype=np.float64).copy()
    steps = max(1, round(t_end / step))
    h = t_end / steps
    t = 0.0
    for _ in range(steps):
        k1 = field(t, y)
        k2 = field(t + h / 2, y + h / 2 * k1)
        k3 = field(t + h / 2, y + h / 2 * k2)
        k4 = field(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y
