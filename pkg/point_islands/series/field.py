"""Desingularised polynomial vector field in (c1, ..., ci, w).

The field is generated, not transcribed: starting from the scaled rate
equations for c1..ci and the tail sum z, the deposition excess
``v = alpha - c1 z`` replaces z, every equation is multiplied by c1 (time
changed from T to tau), v is rewritten through
``w = v + 2 beta c2 + beta (c3 + ... + ci)`` and the w-equation is assembled
from the v-equation and the chain equations. All arithmetic happens in a
sympy polynomial ring over QQ, so every identity is exact.
"""

from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, ring

from point_islands.utils import format_rational, to_fraction

Monomial = tuple[int, ...]
Term = tuple[Fraction, Monomial]


def qq_to_fraction(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def _qq(value: Fraction) -> Any:
    return QQ(value.numerator, value.denominator)


class PolynomialField:
    """Exact polynomial right-hand sides for the variables c1, ..., ci, w.

    Components are indexed ``0 .. i`` in the order ``(c1, c2, ..., ci, w)``.
    Each monomial is an exponent tuple over the same variables.

    Args:
        i: Critical island size.
        alpha: Deposition rate entering the field.
        beta: Fragmentation rate entering the field.
        rates: One sympy ring element per component.
    """

    def __init__(
        self, i: int, alpha: Fraction, beta: Fraction, rates: Sequence[PolyElement]
    ) -> None:
        if len(rates) != i + 1:
            raise ValueError(f"expected {i + 1} components, got {len(rates)}")
        self.i = i
        self.alpha = alpha
        self.beta = beta
        self.rates = tuple(rates)
        self.ring = rates[0].ring
        self.gens = self.ring.gens
        self._terms = tuple(
            tuple(
                sorted(
                    (qq_to_fraction(coeff), tuple(monom))
                    for monom, coeff in rate.terms()
                )
            )
            for rate in self.rates
        )

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(str(g) for g in self.gens)

    @property
    def w_index(self) -> int:
        return self.i

    def terms(self, component: int) -> tuple[Term, ...]:
        return self._terms[component]

    def divided_terms(self, component: int) -> tuple[Term, ...]:
        """Terms of a chain component with the common factor c1 removed."""
        if component == self.w_index:
            raise ValueError("the w component carries no common factor c1")
        quotient = self.rates[component].exquo(self.gens[0])
        return tuple(
            sorted((qq_to_fraction(c), tuple(m)) for m, c in quotient.terms())
        )

    def coefficient(self, component: int, monomial: Monomial) -> Fraction:
        for coeff, monom in self._terms[component]:
            if monom == monomial:
                return coeff
        return Fraction(0)

    def monomial(self, **exponents: int) -> Monomial:
        names = self.variables
        unknown = set(exponents) - set(names)
        if unknown:
            raise KeyError(f"unknown variables: {sorted(unknown)}")
        return tuple(exponents.get(name, 0) for name in names)

    def evaluate(
        self, point: Sequence[Fraction | int | str | float]
    ) -> tuple[Fraction | float, ...]:
        """Evaluate every component at ``(c1, ..., ci, w)``.

        Rational inputs give exact Fractions, any float input gives floats.
        """
        if len(point) != self.i + 1:
            raise ValueError(f"expected {self.i + 1} coordinates, got {len(point)}")
        inexact = any(isinstance(x, float) for x in point)
        values: list[Any] = [
            float(x) if inexact else to_fraction(x) for x in point
        ]
        out: list[Fraction | float] = []
        for terms in self._terms:
            acc: Any = 0
            for coeff, monom in terms:
                prod: Any = float(coeff) if inexact else coeff
                for x, e in zip(values, monom):
                    if e:
                        prod *= x**e
                acc += prod
            out.append(acc)
        return tuple(out)

    def chain_matrix(self) -> list[list[Fraction]]:
        """Linear part of the T-time chain equations for c2..ci at the origin."""
        rows: list[list[Fraction]] = []
        for j in range(1, self.i):
            row = [Fraction(0)] * (self.i - 1)
            for coeff, monom in self.divided_terms(j):
                if sum(monom) == 1:
                    k = monom.index(1)
                    if 1 <= k < self.i:
                        row[k - 1] = coeff
            rows.append(row)
        return rows

    def format(self, component: int) -> str:
        parts: list[str] = []
        for coeff, monom in reversed(self._terms[component]):
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.variables, monom)
                if e
            ]
            body = "*".join(factors) or "1"
            parts.append(f"{format_rational(coeff)}*{body}")
        return " + ".join(parts) or "0"


def build_field(
    i: int, alpha: Fraction | int | str, beta: Fraction | int | str
) -> PolynomialField:
    """Generate the tau-time polynomial field for critical size ``i``.

    Args:
        i: Critical island size, at least 2.
        alpha: Deposition rate, positive.
        beta: Fragmentation rate, positive.

    Returns:
        The field for ``(c1, ..., ci, w)``. The c1 component equals
        ``c1 (w - 2 c1^2)`` and the w component contains ``-alpha w``.

    Raises:
        ValueError: If ``i < 2`` or a rate is not positive.
    """
    a_frac, b_frac = to_fraction(alpha), to_fraction(beta)
    if i < 2:
        raise ValueError(f"i must be ≥ 2, got {i}")
    if a_frac <= 0 or b_frac <= 0:
        raise ValueError(
            f"alpha and beta must be positive, got {format_rational(a_frac)}, "
            f"{format_rational(b_frac)}"
        )
    names = ",".join([f"c{j}" for j in range(1, i + 1)] + ["w", "v"])
    _, *gens = ring(names, QQ)
    c = gens[:i]
    w, v = gens[i], gens[i + 1]
    a, b = _qq(a_frac), _qq(b_frac)

    zero = w * 0
    upper = sum(c[2:], zero)
    eqc1 = v - c[0] ** 2 * 2 + c[1] * b * 2 + upper * b
    eqc = [eqc1]
    for j in range(1, i):
        nxt = c[j + 1] if j + 1 < i else zero
        eqc.append(c[0] * c[j - 1] - c[0] * c[j] - c[j] * b + nxt * b)
    eqz = c[0] ** 2 - c[1] * b
    eqvs = -eqc1 * (-v + a) - c[0] ** 2 * eqz

    v_of_w = w - c[1] * b * 2 - upper * b
    eqcs = [(c[0] * e).compose(v, v_of_w) for e in eqc]
    eqvs = eqvs.compose(v, v_of_w)
    eqws = eqvs + eqcs[1] * b * 2 + sum(eqcs[2:], zero) * b

    rates = [r.drop(v) for r in (*eqcs, eqws)]
    field = PolynomialField(i, a_frac, b_frac, rates)
    c1, wd = field.gens[0], field.gens[i]
    if field.rates[0] != c1 * (wd - 2 * c1**2):
        raise RuntimeError("c1 component lost its c1 (w - 2 c1^2) form")
    return field
