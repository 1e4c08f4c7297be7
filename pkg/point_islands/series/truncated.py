"""Dense univariate power series in c1 with exact rational coefficients."""

from collections.abc import Iterable, Iterator
from fractions import Fraction
from typing import Union

from point_islands.utils import format_rational, to_fraction

Scalar = Union[int, Fraction]


class TruncatedSeries:
    """Power series ``a_0 + a_1 c1 + ... + a_n c1^n + O(c1^(n+1))``.

    Coefficients are stored densely as Fractions. Every arithmetic result is
    truncated to the smaller order of its operands, so coefficients never
    claim more accuracy than the inputs carry.

    Args:
        coefficients: Coefficients by power, lowest first. Padded with zeros
            up to ``order`` when shorter; extra entries are dropped.
        order: Truncation order ``n``. Defaults to ``len(coefficients) - 1``.

    Examples:
        TruncatedSeries.monomial(2, order=6, coefficient=2)  # 2*c1^2 + O(c1^7)
    """

    __slots__ = ("_coefficients",)

    def __init__(
        self, coefficients: Iterable[Scalar | str], order: int | None = None
    ) -> None:
        coeffs = [to_fraction(c) for c in coefficients]
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError(f"order must be >= 0, got {order}")
        coeffs = coeffs[: order + 1]
        coeffs.extend(Fraction(0) for _ in range(order + 1 - len(coeffs)))
        self._coefficients: tuple[Fraction, ...] = tuple(coeffs)

    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls((), order)

    @classmethod
    def monomial(
        cls, power: int, order: int, coefficient: Scalar = 1
    ) -> "TruncatedSeries":
        coeffs = [Fraction(0)] * (order + 1)
        if power <= order:
            coeffs[power] = Fraction(coefficient)
        return cls(coeffs, order)

    @property
    def order(self) -> int:
        return len(self._coefficients) - 1

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._coefficients

    def __len__(self) -> int:
        return len(self._coefficients)

    def __getitem__(self, power: int) -> Fraction:
        if power < 0:
            raise IndexError(f"negative power {power}")
        if power > self.order:
            raise IndexError(f"power {power} beyond truncation order {self.order}")
        return self._coefficients[power]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._coefficients)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._coefficients == other._coefficients

    def __hash__(self) -> int:
        return hash(self._coefficients)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return TruncatedSeries(self._coefficients[: order + 1], order)

    def _coerce(self, other: "TruncatedSeries | Scalar") -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.monomial(0, self.order, to_fraction(other))

    def __add__(self, other: "TruncatedSeries | Scalar") -> "TruncatedSeries":
        rhs = self._coerce(other)
        n = min(self.order, rhs.order)
        return TruncatedSeries(
            (a + b for a, b in zip(self._coefficients[: n + 1], rhs._coefficients)), n
        )

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries((-a for a in self._coefficients), self.order)

    def __sub__(self, other: "TruncatedSeries | Scalar") -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "TruncatedSeries":
        return self._coerce(other) - self

    def __mul__(self, other: "TruncatedSeries | Scalar") -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            factor = to_fraction(other)
            return TruncatedSeries((factor * a for a in self._coefficients), self.order)
        n = min(self.order, other.order)
        a, b = self._coefficients, other._coefficients
        out = [Fraction(0)] * (n + 1)
        for p, ap in enumerate(a[: n + 1]):
            if not ap:
                continue
            for q in range(n + 1 - p):
                if b[q]:
                    out[p + q] += ap * b[q]
        return TruncatedSeries(out, n)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "TruncatedSeries":
        if exponent < 0:
            raise ValueError("negative powers need divide()")
        result = TruncatedSeries.monomial(0, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def divide(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Exact long division by a series with nonzero constant term."""
        if other[0] == 0:
            raise ZeroDivisionError("divisor has zero constant term")
        n = min(self.order, other.order)
        b = other._coefficients
        quotient: list[Fraction] = []
        for k in range(n + 1):
            acc = self._coefficients[k]
            for q in range(1, k + 1):
                acc -= b[q] * quotient[k - q]
            quotient.append(acc / b[0])
        return TruncatedSeries(quotient, n)

    def __truediv__(self, other: "TruncatedSeries | Scalar") -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return self.divide(other)
        return self * (1 / to_fraction(other))

    def derivative(self) -> "TruncatedSeries":
        """d/dc1, known through order n - 1."""
        if self.order == 0:
            return TruncatedSeries.zero(0)
        return TruncatedSeries(
            (k * a for k, a in enumerate(self._coefficients) if k), self.order - 1
        )

    def shift(self, power: int) -> "TruncatedSeries":
        """Multiply by ``c1**power`` keeping the order."""
        return TruncatedSeries(
            [Fraction(0)] * power + list(self._coefficients), self.order
        )

    def evaluate(self, c1: Scalar | float) -> Fraction | float:
        """Horner evaluation of the stored polynomial part."""
        return evaluate_series(self, c1)

    def valuation(self) -> int | None:
        """Lowest power with a nonzero coefficient, None for the zero series."""
        for k, a in enumerate(self._coefficients):
            if a:
                return k
        return None

    def to_strings(self) -> list[str]:
        return [format_rational(a) for a in self._coefficients]

    def format(self, variable: str = "c1") -> str:
        terms: list[str] = []
        for k, a in enumerate(self._coefficients):
            if not a:
                continue
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            if k == 0:
                body = format_rational(mag)
            else:
                power = variable if k == 1 else f"{variable}^{k}"
                if mag == 1:
                    body = power
                elif mag.denominator == 1:
                    body = f"{mag.numerator}*{power}"
                else:
                    body = f"{mag.numerator}*{power}/{mag.denominator}"
            terms.append(f"{sign} {body}")
        terms.append(f"+ O({variable}^{self.order + 1})")
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.format()})"


def evaluate_series(series: TruncatedSeries, c1: Scalar | float) -> Fraction | float:
    """Evaluate ``series`` at ``c1`` by Horner's rule; exact for rational c1."""
    point: Fraction | float = c1 if isinstance(c1, float) else to_fraction(c1)
    acc: Fraction | float = Fraction(0) if isinstance(point, Fraction) else 0.0
    for a in reversed(series.coefficients):
        acc = acc * point + (a if isinstance(point, Fraction) else float(a))
    return acc
