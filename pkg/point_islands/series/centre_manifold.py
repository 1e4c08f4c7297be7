"""Order-by-order centre-manifold expansion of the desingularised field.

On the centre manifold every chain concentration and w are graphs over c1:
``c_j = g_j(c1)`` and ``w = g_w(c1)``. Substituting the graphs into the field
gives the invariance equations

    g_j'(c1) (g_w - 2 c1^2) = c1 g_{j-1} - c1 g_j - beta g_j + beta g_{j+1}
    c1 g_w'(c1) (g_w - 2 c1^2) = F_w(c1, g_2, ..., g_i, g_w)

with ``g_1 = c1`` and ``g_{i+1} = 0``. At each order k the w coefficient is
solved first, then ``g_i`` down to ``g_2``; every solve is linear in one
unknown with pivot alpha (w) or beta (chain).
"""

import math
import time
from collections.abc import Callable, Sequence
from fractions import Fraction
from functools import partial

from point_islands.config import default_order
from point_islands.observability.logging import log
from point_islands.observability.metrics import SERIES_SECONDS, SERIES_SOLVES
from point_islands.series.field import PolynomialField, Term
from point_islands.series.truncated import TruncatedSeries, evaluate_series

__all__ = [
    "CentreManifoldExpansion",
    "PivotError",
    "compose_terms",
    "convergence_probe",
    "evaluate_series",
    "invariance_residuals",
    "reduced_ode",
    "root_test",
    "solve_centre_manifold",
]


class PivotError(ValueError):
    """Raised when a coefficient equation has a pivot other than the expected one."""

    def __init__(
        self, order: int, variable: str, pivot: Fraction, expected: Fraction
    ) -> None:
        self.order = order
        self.variable = variable
        self.pivot = pivot
        self.expected = expected
        super().__init__(
            f"order {order}, variable {variable}: pivot {pivot}, expected ±{expected}"
        )


class CentreManifoldExpansion:
    """Graphs ``g_2 .. g_i`` and ``g_w`` of the centre manifold, to order n."""

    def __init__(
        self,
        i: int,
        alpha: Fraction,
        beta: Fraction,
        g: dict[int, TruncatedSeries],
        g_w: TruncatedSeries,
    ) -> None:
        if sorted(g) != list(range(2, i + 1)):
            raise ValueError(f"expected g_2..g_{i}, got keys {sorted(g)}")
        self.i = i
        self.alpha = alpha
        self.beta = beta
        self.g = dict(g)
        self.g_w = g_w

    @property
    def n(self) -> int:
        return self.i + 1

    @property
    def order(self) -> int:
        return self.g_w.order

    @property
    def reduced_ode(self) -> TruncatedSeries:
        """Right-hand side of the flow on the curve, ``g_w - 2 c1^2``."""
        return self.g_w - TruncatedSeries.monomial(2, self.order, 2)

    def series(self) -> dict[str, TruncatedSeries]:
        named = {f"g{j}": s for j, s in sorted(self.g.items())}
        named["gw"] = self.g_w
        return named

    def graph(self, variable: int) -> TruncatedSeries:
        """Graph over c1 of variable index ``0..i`` in field order."""
        if variable == 0:
            return TruncatedSeries.monomial(1, self.order)
        if variable == self.i:
            return self.g_w
        return self.g[variable + 1]


def reduced_ode(expansion: CentreManifoldExpansion) -> TruncatedSeries:
    return expansion.reduced_ode


def compose_terms(
    terms: Sequence[Term], graphs: Sequence[TruncatedSeries], order: int
) -> TruncatedSeries:
    """Substitute series ``graphs`` (variable 0 is c1 itself) into ``terms``.

    Powers of c1 are applied as shifts; powers of the other variables are
    cached for the duration of the call.
    """
    cache: dict[tuple[int, int], TruncatedSeries] = {}

    def power(var: int, e: int) -> TruncatedSeries:
        key = (var, e)
        if key not in cache:
            base = graphs[var].truncate(order)
            cache[key] = base if e == 1 else power(var, e - 1) * base
        return cache[key]

    total = TruncatedSeries.zero(order)
    for coeff, monom in terms:
        product = TruncatedSeries.monomial(0, order, coeff)
        for var, e in enumerate(monom):
            if var and e:
                product = product * power(var, e)
        total = total + product.shift(monom[0])
    return total


class _Solver:
    """Mutable coefficient tables for one expansion run."""

    def __init__(self, field: PolynomialField, n: int) -> None:
        self.field = field
        self.n = n
        self.i = field.i
        width = n + 2
        self.table = [[Fraction(0)] * width for _ in range(self.i + 1)]
        self.table[0][1] = Fraction(1)
        self.w_terms = field.terms(self.i)
        self.chain_terms = [field.divided_terms(j) for j in range(1, self.i)]

    def series(self, var: int, k: int) -> TruncatedSeries:
        return TruncatedSeries(self.table[var][: k + 1], k)

    def derivative(self, var: int, k: int) -> TruncatedSeries:
        row = self.table[var]
        return TruncatedSeries((m * row[m] for m in range(1, k + 2)), k)

    def graphs(self, k: int) -> list[TruncatedSeries]:
        return [self.series(var, k) for var in range(self.i + 1)]

    def slow_rate(self, k: int) -> TruncatedSeries:
        return self.series(self.i, k) - TruncatedSeries.monomial(2, k, 2)

    def w_residual(self, k: int) -> Fraction:
        lhs = (self.slow_rate(k) * self.derivative(self.i, k)).shift(1)
        rhs = compose_terms(self.w_terms, self.graphs(k), k)
        return (lhs - rhs)[k]

    def chain_residual(self, var: int, k: int) -> Fraction:
        lhs = self.slow_rate(k) * self.derivative(var, k)
        rhs = compose_terms(self.chain_terms[var - 1], self.graphs(k), k)
        return (lhs - rhs)[k]

    def solve(
        self,
        var: int,
        k: int,
        residual: Callable[[int], Fraction],
        expected: Fraction,
    ) -> Fraction:
        row = self.table[var]
        row[k] = Fraction(0)
        r0 = residual(k)
        row[k] = Fraction(1)
        pivot = residual(k) - r0
        if pivot == 0 or abs(pivot) != abs(expected):
            row[k] = Fraction(0)
            raise PivotError(k, self.field.variables[var], pivot, expected)
        row[k] = -r0 / pivot
        return row[k]


def solve_centre_manifold(
    field: PolynomialField, order: int | None = None
) -> CentreManifoldExpansion:
    """Expand the centre manifold of ``field`` to the given order.

    Args:
        field: Field produced by ``build_field``.
        order: Truncation order n, at least 2. Defaults to ``2i + 6``.

    Returns:
        The expansion with every series known through order n.

    Raises:
        ValueError: If ``order < 2``.
        PivotError: If an order-k equation does not have pivot ±alpha (w)
            or ±beta (chain).
    """
    n = default_order(field.i) if order is None else order
    if n < 2:
        raise ValueError(f"order must be ≥ 2, got {n}")
    started = time.perf_counter()
    solver = _Solver(field, n)
    i = field.i
    for k in range(2, n + 1):
        solver.solve(i, k, solver.w_residual, field.alpha)
        for var in range(i - 1, 0, -1):
            solver.solve(var, k, partial(solver.chain_residual, var), field.beta)

    expansion = CentreManifoldExpansion(
        i,
        field.alpha,
        field.beta,
        {var + 1: solver.series(var, n) for var in range(1, i)},
        solver.series(i, n),
    )
    elapsed = time.perf_counter() - started
    SERIES_SOLVES.labels(kind="centre_manifold").inc()
    SERIES_SECONDS.labels(kind="centre_manifold").observe(elapsed)
    log.info(
        "series_solved",
        kind="centre_manifold",
        i=i,
        order=n,
        duration_ms=round(elapsed * 1000, 2),
    )
    return expansion


def invariance_residuals(
    field: PolynomialField, expansion: CentreManifoldExpansion
) -> dict[str, TruncatedSeries]:
    """Residual series of every invariance equation, each known to order n - 1."""
    if field.i != expansion.i:
        raise ValueError(f"field has i={field.i}, expansion has i={expansion.i}")
    n = expansion.order
    graphs = [expansion.graph(var) for var in range(field.i + 1)]
    slow = expansion.reduced_ode
    out: dict[str, TruncatedSeries] = {}
    for var in range(1, field.i):
        lhs = graphs[var].derivative() * slow
        rhs = compose_terms(field.divided_terms(var), graphs, n)
        out[f"g{var + 1}"] = lhs - rhs
    lhs_w = (expansion.g_w.derivative() * slow).shift(1)
    out["gw"] = lhs_w - compose_terms(field.terms(field.i), graphs, n)
    return out


def root_test(series: TruncatedSeries) -> list[tuple[int, float]]:
    """``(k, |a_k|^(1/k))`` for every nonzero coefficient with ``k >= 1``."""
    out: list[tuple[int, float]] = []
    for k, a in enumerate(series.coefficients):
        if k == 0 or a == 0:
            continue
        log_abs = math.log(abs(a.numerator)) - math.log(a.denominator)
        out.append((k, math.exp(log_abs / k)))
    return out


def convergence_probe(
    expansion: CentreManifoldExpansion,
) -> dict[str, list[tuple[int, float]]]:
    """Root-test sequences of every series in the expansion.

    Diagnostic only: growth suggests a zero radius of convergence but nothing
    is asserted.
    """
    if expansion.order < 10:
        raise ValueError(f"convergence check needs order ≥ 10, got {expansion.order}")
    report = {name: root_test(s) for name, s in expansion.series().items()}
    report["reduced_ode"] = root_test(expansion.reduced_ode)
    log.info(
        "convergence_probed",
        i=expansion.i,
        order=expansion.order,
        last_roots={
            name: round(seq[-1][1], 6) for name, seq in report.items() if seq
        },
    )
    return report
