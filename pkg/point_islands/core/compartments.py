"""Compartmental structure, equilibrium and boundedness of the closed chain.

Compartment ``j`` holds the mass ``j c_j`` of the size-``j`` clusters. Every
reaction then moves mass between compartments, so

    j c_j' = sum_k (F_jk - F_kj) + I_j - F_0j

holds exactly, where ``F_ab`` is the flow from ``b`` into ``a`` and
compartment 0 is the outside.
"""

import math
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

import numpy as np
from pydantic import BaseModel, computed_field
from scipy.optimize import brentq
from sympy import Matrix, Poly, Rational, Symbol

from point_islands.config import IntegrationConfig, ModelParams, build_params
from point_islands.core.model import Number, as_vector, is_exact, rhs_closed
from point_islands.core.simulate import simulate_closed
from point_islands.observability.logging import log
from point_islands.series.field import build_field
from point_islands.series.qssa import qssa_closed_form
from point_islands.utils import format_rational, to_fraction


class FlowTerm(BaseModel, frozen=True):
    """One flow ``coefficient * prod c_k^e_k`` from ``source`` into ``target``."""

    target: int
    source: int
    coefficient: int
    exponents: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"F{self.target},{self.source}"

    def monomial(self) -> str:
        factors = [
            f"c{k}" if e == 1 else f"c{k}^{e}"
            for k, e in enumerate(self.exponents, start=1)
            if e
        ]
        body = "*".join(factors) or "1"
        return body if self.coefficient == 1 else f"{self.coefficient}*{body}"

    def value(self, c: np.ndarray) -> Number:
        acc: Any = Fraction(self.coefficient)
        if not is_exact(c):
            acc = float(acc)
        for x, e in zip(c, self.exponents):
            if e:
                acc *= x**e
        return acc


def _term(
    i: int, target: int, source: int, coefficient: int, **powers: int
) -> FlowTerm:
    exponents = [0] * i
    for name, e in powers.items():
        exponents[int(name[1:]) - 1] += e
    return FlowTerm(
        target=target,
        source=source,
        coefficient=coefficient,
        exponents=tuple(exponents),
    )


def flow_terms(i: int) -> tuple[FlowTerm, ...]:
    """Every mass flow of the closed chain for critical size ``i``."""
    if i < 2:
        raise ValueError(f"i must be ≥ 2, got {i}")
    terms = [_term(i, 2, 1, 2, c1=2)]
    terms += [
        _term(i, j, 1, 1, **{"c1": 1, f"c{j - 1}": 1}) for j in range(3, i + 1)
    ]
    terms += [_term(i, j + 1, j, j, **{"c1": 1, f"c{j}": 1}) for j in range(2, i)]
    terms.append(_term(i, 1, 2, 2, c2=1))
    for j in range(3, i + 1):
        terms.append(_term(i, 1, j, 1, **{f"c{j}": 1}))
        terms.append(_term(i, j - 1, j, j - 1, **{f"c{j}": 1}))
    terms.append(_term(i, 0, 1, 1, **{"c1": 1, f"c{i}": 1}))
    terms.append(_term(i, 0, i, i, **{"c1": 1, f"c{i}": 1}))
    return tuple(terms)


class Flow(BaseModel, frozen=True, arbitrary_types_allowed=True):
    target: int
    source: int
    monomial: str
    value: Number


class CompartmentDecomposition(BaseModel, frozen=True, arbitrary_types_allowed=True):
    """Inputs, inter-compartment flows and outflows at one state."""

    i: int
    inputs: tuple[Number, ...]
    flows: tuple[Flow, ...]

    def flow(self, target: int, source: int) -> Number:
        total: Any = 0
        for f in self.flows:
            if (f.target, f.source) == (target, source):
                total += f.value
        return total

    def outflows(self) -> tuple[Number, ...]:
        return tuple(self.flow(0, j) for j in range(1, self.i + 1))

    def mass_rates(self) -> tuple[Number, ...]:
        rates: list[Any] = list(self.inputs)
        for f in self.flows:
            rates[f.source - 1] -= f.value
            if f.target:
                rates[f.target - 1] += f.value
        return tuple(rates)

    def reconstruct(self) -> tuple[Number, ...]:
        """Concentration derivatives recovered from the flows."""
        return tuple(rate / j for j, rate in enumerate(self.mass_rates(), start=1))


def decompose(
    i: int, alpha: Fraction | int | str | float, state: Sequence[Any] | np.ndarray
) -> CompartmentDecomposition:
    """Split the closed-chain right-hand side at ``state`` into mass flows.

    Raises:
        ValueError: If ``state`` has the wrong length or a negative entry.
    """
    c = as_vector(state)
    if c.shape[0] != i:
        raise ValueError(f"expected {i} concentrations, got {c.shape[0]}")
    if np.any(c < 0):
        raise ValueError("state must be non-negative")
    a: Number = to_fraction(alpha)
    if not is_exact(c):
        a = float(a)
    zero: Number = Fraction(0) if is_exact(c) else 0.0
    flows = tuple(
        Flow(target=t.target, source=t.source, monomial=t.monomial(), value=t.value(c))
        for t in flow_terms(i)
    )
    return CompartmentDecomposition(i=i, inputs=(a,) + (zero,) * (i - 1), flows=flows)


class MonotonicityReport(BaseModel, frozen=True):
    passed: bool
    flows: tuple[str, ...]
    witness: str | None = None


def monotonicity_check(
    i: int, extra: Sequence[FlowTerm] = ()
) -> MonotonicityReport:
    """Check structurally that every flow is nondecreasing in every concentration.

    A monomial with a positive coefficient and non-negative exponents has
    non-negative partial derivatives on the non-negative orthant, so the
    check is complete. ``extra`` appends flows, e.g. to exercise the check.
    """
    terms = (*flow_terms(i), *extra)
    rendered = tuple(f"{t.name} = {t.monomial()}" for t in terms)
    for t in terms:
        if t.coefficient <= 0 or any(e < 0 for e in t.exponents):
            return MonotonicityReport(passed=False, flows=rendered, witness=t.name)
    return MonotonicityReport(passed=True, flows=rendered)


class EquilibriumPoint(BaseModel, frozen=True, arbitrary_types_allowed=True):
    i: int
    alpha: Fraction
    values: tuple[Number, ...]
    exact: bool

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sup_norm(self) -> float:
        return max(float(v) for v in self.values)


def _monomer_root(i: int, alpha: Fraction) -> tuple[Number, bool]:
    x = Symbol("x")
    a = Rational(alpha.numerator, alpha.denominator)
    poly = Poly((i + 1) * x ** (i + 1) - a * sum(x**k for k in range(i)), x)
    for factor, _ in poly.factor_list()[1]:
        if factor.degree() == 1:
            lead, const = factor.all_coeffs()
            root = Fraction(int((-const / lead).p), int((-const / lead).q))
            if root > 0:
                return root, True
    a_f = float(alpha)

    def residual(c1: float) -> float:
        return (i + 1) * c1 ** (i + 1) - a_f * sum(c1**k for k in range(i))

    return brentq(residual, 0.0, max(1.0, math.sqrt(a_f)) + 1.0, xtol=1e-15), False


def equilibrium(i: int, alpha: Fraction | int | str) -> EquilibriumPoint:
    """Unique positive rest point of the closed chain.

    ``c_2..c_i`` sit at their quasi-steady state and the monomer value is the
    positive root of ``(i+1) c1^(i+1) = alpha (1 + c1 + ... + c1^(i-1))``,
    the mass balance ``alpha = (i+1) c1 c_i``. The point is exact whenever
    that root is rational.

    Examples:
        equilibrium(2, 8).values == (Fraction(2), Fraction(4, 3))
    """
    if i < 2:
        raise ValueError(f"i must be ≥ 2, got {i}")
    a = to_fraction(alpha)
    if a <= 0:
        raise ValueError(f"alpha must be positive, got {format_rational(a)}")
    c1, exact = _monomer_root(i, a)
    chain = qssa_closed_form(i, c1)
    values = (c1, *(chain[j] for j in range(2, i + 1)))
    return EquilibriumPoint(i=i, alpha=a, values=values, exact=exact)


def verify_equilibrium(
    i: int, alpha: Fraction | int | str, point: Sequence[Any]
) -> tuple[Number, ...]:
    """Closed-chain right-hand side at ``point``; zero at a rest point."""
    params = build_params(i, alpha, 1)
    values = [x if isinstance(x, float) else to_fraction(x) for x in point]
    return tuple(rhs_closed(params, values))


def chain_spectrum(i: int) -> dict[Fraction, int]:
    """Eigenvalues of the linear chain block for c2..ci at the origin.

    The block is upper bidiagonal with -1 on the diagonal, so the spectrum is
    ``{-1: i - 1}``.
    """
    field = build_field(i, 1, 1)
    rows = [
        [Rational(x.numerator, x.denominator) for x in row]
        for row in field.chain_matrix()
    ]
    spectrum = Matrix(rows).eigenvals()
    return {Fraction(int(k.p), int(k.q)): int(m) for k, m in spectrum.items()}


class BoundednessReport(BaseModel, frozen=True):
    passed: bool
    runs: int
    bound: float
    worst: float
    transient: float


def boundedness_check(
    params: ModelParams,
    initials: Sequence[Sequence[float]],
    t_end: float = 1e3,
    transient: float = 1.0,
    config: IntegrationConfig | None = None,
) -> BoundednessReport:
    """Simulate the closed chain from each initial state and bound its sup-norm.

    After ``transient`` the sup-norm must stay below
    ``max(initial sup-norm, 2 * equilibrium sup-norm)``. The peak is the
    running maximum over every accepted step of the post-transient run.
    """
    if not initials:
        raise ValueError("need at least one initial state")
    if t_end <= transient:
        raise ValueError(f"t_end must exceed transient = {transient}, got {t_end}")
    eq = equilibrium(params.i, params.alpha)
    base = config or IntegrationConfig(rtol=1e-8, atol=1e-10)
    settle = base.with_horizon(transient)
    # autonomous chain: the second leg restarts the clock at 0
    rest = base.with_horizon(t_end - transient)
    passed, worst, bound = True, 0.0, 0.0
    for initial in initials:
        start = float(np.max(np.abs(initial)))
        limit = max(start, 2 * eq.sup_norm)
        head = simulate_closed(params, settle, initial)
        tail = simulate_closed(params, rest, np.clip(head.final, 0.0, None))
        peak = tail.stats.peak
        worst, bound = max(worst, peak / limit), max(bound, limit)
        passed = passed and peak <= limit
    log.info(
        "boundedness_checked",
        i=params.i,
        runs=len(initials),
        worst_ratio=round(worst, 6),
        passed=passed,
    )
    return BoundednessReport(
        passed=passed, runs=len(initials), bound=bound, worst=worst, transient=transient
    )
