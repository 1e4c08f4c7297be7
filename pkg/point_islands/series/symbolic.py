"""Reduced c1 flow with alpha and beta kept as symbols.

The tau-time field is invariant under ``c -> lam c``, ``w -> lam^2 w``,
``alpha -> lam^2 alpha``, ``beta -> lam beta``, so the coefficient of
``c1^k`` in the reduced flow is ``beta^(2-k) P_k(beta^2 / alpha)``. At
beta = 1 every pivot is ±alpha or ±1 and alpha enters the field only through
``-alpha (w - 2 c1^2)``, so ``P_k`` is a polynomial in ``u = 1 / alpha``.
It is recovered by exact interpolation over numeric solves at
``alpha = 1, 2, 3, ...``.
"""

import time
from fractions import Fraction

import sympy
from sympy.polys.polyfuncs import interpolate

from point_islands.config import default_order
from point_islands.observability.logging import log
from point_islands.observability.metrics import SERIES_SECONDS, SERIES_SOLVES
from point_islands.series.centre_manifold import solve_centre_manifold
from point_islands.series.field import build_field
from point_islands.series.truncated import TruncatedSeries

ALPHA, BETA = sympy.symbols("α β", positive=True)
_U = sympy.Symbol("u")
# interpolants must reproduce this many samples they were not fitted on
CHECK_POINTS = 2


class InterpolationError(RuntimeError):
    """Raised when no polynomial of the allowed degree fits the samples."""


def _rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


class SymbolicFlow:
    """Nonzero coefficients of the reduced flow through ``order``."""

    def __init__(
        self, i: int, order: int, coefficients: dict[int, sympy.Expr]
    ) -> None:
        self.i = i
        self.order = order
        self.coefficients = dict(sorted(coefficients.items()))

    def __getitem__(self, power: int) -> sympy.Expr:
        if power > self.order:
            raise IndexError(f"power {power} beyond truncation order {self.order}")
        return self.coefficients.get(power, sympy.Integer(0))

    def evaluate(self, alpha: Fraction | int, beta: Fraction | int) -> TruncatedSeries:
        """Numeric series at ``(alpha, beta)``; exact for rational rates."""
        point = {ALPHA: _rational(Fraction(alpha)), BETA: _rational(Fraction(beta))}
        coeffs = [Fraction(0)] * (self.order + 1)
        for k, expr in self.coefficients.items():
            value = sympy.Rational(expr.subs(point))
            coeffs[k] = Fraction(int(value.p), int(value.q))
        return TruncatedSeries(coeffs, self.order)

    def to_strings(self) -> dict[str, str]:
        return {str(k): str(expr) for k, expr in self.coefficients.items()}

    def format(self, variable: str = "c1") -> str:
        terms: list[str] = []
        for k, expr in self.coefficients.items():
            negative = expr.could_extract_minus_sign()
            mag = -expr if negative else expr
            power = variable if k == 1 else f"{variable}^{k}"
            if mag == 1:
                body = power
            elif mag.is_Add:
                body = f"({mag})*{power}"
            else:
                body = f"{mag}*{power}"
            terms.append(f"{'-' if negative else '+'} {body}")
        terms.append(f"+ O({variable}^{self.order + 1})")
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


def symbolic_reduced_ode(
    i: int, order: int | None = None, max_degree: int | None = None
) -> SymbolicFlow:
    """Reduced c1 flow of the centre manifold as functions of alpha and beta.

    Args:
        i: Critical island size, at least 2.
        order: Truncation order n. Defaults to ``2i + 6``.
        max_degree: Largest degree in ``1 / alpha`` tried before giving up.
            Defaults to ``order``.

    Returns:
        Coefficients of ``g_w - 2 c1^2`` through ``c1^order``.

    Raises:
        InterpolationError: If no fit of degree ``max_degree`` or less
            reproduces the check samples.
    """
    n = default_order(i) if order is None else order
    limit = n if max_degree is None else max_degree
    started = time.perf_counter()
    samples: list[tuple[Fraction, TruncatedSeries]] = []
    fitted: dict[int, sympy.Expr] | None = None
    for points in range(1, limit + 2):
        while len(samples) < points + CHECK_POINTS:
            alpha = len(samples) + 1
            flow = solve_centre_manifold(build_field(i, alpha, 1), n).reduced_ode
            samples.append((Fraction(1, alpha), flow))
        fitted = _fit(samples, points, n)
        if fitted is not None:
            break
    if fitted is None:
        raise InterpolationError(
            f"no fit in 1/alpha of degree ≤ {limit} for i={i}, order {n}"
        )

    coefficients: dict[int, sympy.Expr] = {}
    for k, poly in fitted.items():
        expr = sympy.factor(BETA ** (2 - k) * poly.subs(_U, BETA**2 / ALPHA))
        if expr != 0:
            coefficients[k] = expr
    elapsed = time.perf_counter() - started
    SERIES_SOLVES.labels(kind="symbolic").inc()
    SERIES_SECONDS.labels(kind="symbolic").observe(elapsed)
    log.info(
        "series_solved",
        kind="symbolic",
        i=i,
        order=n,
        samples=len(samples),
        duration_ms=round(elapsed * 1000, 2),
    )
    return SymbolicFlow(i, n, coefficients)


def _fit(
    samples: list[tuple[Fraction, TruncatedSeries]], points: int, order: int
) -> dict[int, sympy.Expr] | None:
    """Fit every power on the first ``points`` samples; None if a check misses."""
    fitted: dict[int, sympy.Expr] = {}
    for k in range(order + 1):
        data = [(_rational(u), _rational(flow[k])) for u, flow in samples[:points]]
        poly = sympy.expand(interpolate(data, _U))
        for u, flow in samples[points : points + CHECK_POINTS]:
            if poly.subs(_U, _rational(u)) != _rational(flow[k]):
                return None
        fitted[k] = poly
    return fitted
