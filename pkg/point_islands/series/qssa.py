"""Quasi-steady-state closed forms and their comparison with the centre manifold."""

import time
from fractions import Fraction
from typing import Protocol

from pydantic import BaseModel, computed_field

from point_islands.config import Rational, default_order
from point_islands.observability.logging import log
from point_islands.observability.metrics import SERIES_SECONDS, SERIES_SOLVES
from point_islands.series.centre_manifold import PivotError, compose_terms
from point_islands.series.field import build_field
from point_islands.series.truncated import TruncatedSeries
from point_islands.utils import format_rational, to_fraction


class ParameterMismatch(ValueError):
    """Raised when two expansions do not describe the same system."""


class QssaExpansion:
    """QSSA closed forms for c2..ci with their series and the induced flow.

    Closed forms are stored as integer coefficient lists (lowest power first)
    of numerator and denominator polynomials in c1.
    """

    def __init__(
        self,
        i: int,
        alpha: Fraction,
        closed_forms: dict[int, tuple[tuple[int, ...], tuple[int, ...]]],
        series: dict[int, TruncatedSeries],
        g_w_series: TruncatedSeries,
    ) -> None:
        self.i = i
        self.alpha = alpha
        self.beta = Fraction(1)
        self.closed_forms = closed_forms
        self.series = series
        self.g_w_series = g_w_series

    @property
    def order(self) -> int:
        return self.g_w_series.order

    @property
    def reduced_ode(self) -> TruncatedSeries:
        return self.g_w_series - TruncatedSeries.monomial(2, self.order, 2)

    def evaluate(self, c1: Fraction | int | float) -> dict[int, Fraction | float]:
        return qssa_closed_form(self.i, c1)


def _closed_form_polynomials(
    i: int, j: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    numerator = tuple(1 if j <= p <= i else 0 for p in range(i + 1))
    denominator = tuple([1] * i)
    return numerator, denominator


def qssa_closed_form(i: int, c1: Fraction | int | float) -> dict[int, Fraction | float]:
    """QSSA values of c2..ci at a given monomer concentration.

    ``c_j = (c1^j + ... + c1^i) / (1 + c1 + ... + c1^(i-1))``, exact for
    rational c1. The denominator is at least 1 for non-negative c1.
    """
    if i < 2:
        raise ValueError(f"i must be ≥ 2, got {i}")
    x: Fraction | float = c1 if isinstance(c1, float) else to_fraction(c1)
    if x < 0:
        raise ValueError(f"c1 must be non-negative, got {c1}")
    powers = [x**p for p in range(i + 1)]
    denominator = sum(powers[:i])
    return {j: sum(powers[j:]) / denominator for j in range(2, i + 1)}


def qssa_formula_series(i: int, j: int, order: int) -> TruncatedSeries:
    """``c1^j + sum_k (c1^(ki+j) - c1^(ki+1))`` truncated at ``order``."""
    coeffs = [Fraction(0)] * (order + 1)
    if j <= order:
        coeffs[j] += 1
    k = 1
    while k * i + 1 <= order:
        coeffs[k * i + 1] -= 1
        if k * i + j <= order:
            coeffs[k * i + j] += 1
        k += 1
    return TruncatedSeries(coeffs, order)


def qssa_series(i: int, order: int) -> dict[int, TruncatedSeries]:
    """MacLaurin series of the QSSA closed forms by exact long division.

    Raises:
        ValueError: If ``order < i + 1``.
        RuntimeError: If the division disagrees with the closed-form pattern.
    """
    if order < i + 1:
        raise ValueError(f"order must be ≥ i + 1 = {i + 1}, got {order}")
    out: dict[int, TruncatedSeries] = {}
    for j in range(2, i + 1):
        numerator, denominator = _closed_form_polynomials(i, j)
        divided = TruncatedSeries(numerator, order).divide(
            TruncatedSeries(denominator, order)
        )
        if divided != qssa_formula_series(i, j, order):
            raise RuntimeError(f"QSSA series for c{j} disagrees with its pattern")
        out[j] = divided
    return out


def qssa_gw(i: int, alpha: Fraction | int | str, order: int) -> TruncatedSeries:
    """QSSA graph of w over c1.

    The chain sits at its quasi-steady state and w takes one chord step of
    its balance equation from ``w = 2 c1^2``, with the Jacobian frozen at the
    rest point: ``g_w = 2 c1^2 - F_w(c1, c_qssa, 2 c1^2) / (dF_w/dw)(0)``.

    Raises:
        PivotError: If ``alpha`` is zero.
    """
    a = to_fraction(alpha)
    if a == 0:
        raise PivotError(2, "w", Fraction(0), a)
    order = max(order, 2)
    field = build_field(i, a, 1)
    pivot = field.coefficient(i, field.monomial(w=1))
    if pivot == 0:
        raise PivotError(2, "w", pivot, a)
    base = TruncatedSeries.monomial(2, order, 2)
    chain = qssa_series(i, max(order, i + 1))
    graphs = [TruncatedSeries.monomial(1, order)]
    graphs += [chain[j].truncate(order) for j in range(2, i + 1)]
    graphs.append(base)
    balance = compose_terms(field.terms(i), graphs, order)
    return base - balance / pivot


def qssa_expansion(
    i: int, alpha: Fraction | int | str, order: int | None = None
) -> QssaExpansion:
    n = default_order(i) if order is None else order
    started = time.perf_counter()
    a = to_fraction(alpha)
    chain = qssa_series(i, max(n, i + 1))
    expansion = QssaExpansion(
        i,
        a,
        {j: _closed_form_polynomials(i, j) for j in range(2, i + 1)},
        {j: s.truncate(n) for j, s in chain.items()},
        qssa_gw(i, a, n),
    )
    elapsed = time.perf_counter() - started
    SERIES_SOLVES.labels(kind="qssa").inc()
    SERIES_SECONDS.labels(kind="qssa").observe(elapsed)
    log.info(
        "series_solved",
        kind="qssa",
        i=i,
        order=n,
        duration_ms=round(elapsed * 1000, 2),
    )
    return expansion


class _ReducedFlow(Protocol):
    i: int
    alpha: Fraction
    beta: Fraction

    @property
    def order(self) -> int: ...

    @property
    def reduced_ode(self) -> TruncatedSeries: ...


class DivergenceRow(BaseModel, frozen=True):
    """Reduced-flow coefficients of both expansions at one power of c1."""

    power: int
    cm: Rational
    qssa: Rational

    @computed_field  # type: ignore[prop-decorator]
    @property
    def equal(self) -> bool:
        return self.cm == self.qssa


class DivergenceReport(BaseModel, frozen=True):
    """Power-by-power comparison of two reduced c1 flows."""

    i: int
    alpha: Rational
    order: int
    rows: tuple[DivergenceRow, ...]
    checked_powers: tuple[int, ...]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def first_difference(self) -> int | None:
        return next((row.power for row in self.rows if not row.equal), None)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def leading_terms_agree(self) -> bool:
        by_power = {row.power: row for row in self.rows}
        return all(by_power[p].equal for p in self.checked_powers if p in by_power)


def compare_expansions(cm: _ReducedFlow, q: _ReducedFlow) -> DivergenceReport:
    """Compare the reduced flows of two expansions coefficient by coefficient.

    The powers ``i + 3``, ``i + 4`` and ``2i + 3`` are the ones where the
    centre manifold and the QSSA are expected to agree.

    Raises:
        ParameterMismatch: If i, alpha, beta or the order differ, or beta != 1.
    """
    if (cm.i, cm.alpha, cm.order) != (q.i, q.alpha, q.order):
        raise ParameterMismatch(
            f"cannot compare (i={cm.i}, alpha={format_rational(cm.alpha)}, "
            f"order={cm.order}) with (i={q.i}, alpha={format_rational(q.alpha)}, "
            f"order={q.order})"
        )
    if cm.beta != 1 or q.beta != 1:
        raise ParameterMismatch("comparison is defined in scaled units, beta = 1")
    left, right = cm.reduced_ode, q.reduced_ode
    rows = tuple(
        DivergenceRow(power=k, cm=left[k], qssa=right[k])
        for k in range(cm.order + 1)
    )
    i = cm.i
    report = DivergenceReport(
        i=i,
        alpha=cm.alpha,
        order=cm.order,
        rows=rows,
        checked_powers=(i + 3, i + 4, 2 * i + 3),
    )
    log.info(
        "expansions_compared",
        i=i,
        alpha=format_rational(cm.alpha),
        first_difference=report.first_difference,
        leading_terms_agree=report.leading_terms_agree,
    )
    return report
