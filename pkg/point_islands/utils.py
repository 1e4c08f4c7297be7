import os
from fractions import Fraction
from numbers import Rational as _Rational
from typing import Any


def env(key: str, default: str | None = None) -> str | None:
    return os.environ.get(key, default)


def to_fraction(value: Any) -> Fraction:
    """Coerce an int, str, float or rational into an exact Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10`` rather
    than the binary expansion. Strings accept ``"p/q"`` and decimal notation.

    Raises:
        ValueError: If the value is not a finite number.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, _Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"expected a finite number, got {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise ValueError(f"expected a number, got {type(value).__name__}")


def format_rational(value: Fraction | int) -> str:
    """Render a rational as ``"p/q"`` in lowest terms, or ``"p"`` if integral."""
    frac = Fraction(value)
    if frac.denominator == 1:
        return str(frac.numerator)
    return f"{frac.numerator}/{frac.denominator}"
