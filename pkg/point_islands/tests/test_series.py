from fractions import Fraction

import pytest

from point_islands.series.field import build_field
from point_islands.series.truncated import TruncatedSeries


def _series(*coefficients: int | str, order: int | None = None) -> TruncatedSeries:
    return TruncatedSeries(coefficients, order)


class TestTruncatedSeries:
    def test_pads_to_order(self) -> None:
        s = _series(1, 2, order=4)
        assert s.coefficients == (1, 2, 0, 0, 0)
        assert s.order == 4

    def test_product_truncates_to_smaller_order(self) -> None:
        product = _series(1, 1, order=6) * _series(1, -1, order=3)
        assert product == _series(1, 0, -1, 0)

    def test_geometric_division(self) -> None:
        quotient = _series(1, order=5) / _series(1, -1, order=5)
        assert quotient == _series(1, 1, 1, 1, 1, 1)

    def test_division_needs_a_unit(self) -> None:
        with pytest.raises(ZeroDivisionError, match="zero constant term"):
            _series(1, 1) / _series(0, 1)

    def test_power(self) -> None:
        assert _series(1, 1, order=3) ** 3 == _series(1, 3, 3, 1)

    def test_derivative_loses_one_order(self) -> None:
        d = _series(5, 0, 3, 1).derivative()
        assert d == _series(0, 6, 3)

    def test_shift_keeps_order(self) -> None:
        assert _series(1, 2, 3).shift(2) == _series(0, 0, 1)

    def test_scalar_arithmetic_is_exact(self) -> None:
        s = (_series(1, 3) - 1) / 3
        assert s == _series(0, 1)
        assert (2 - _series(1, 1)) == _series(1, -1)

    def test_evaluate(self) -> None:
        s = _series(1, 2, 3)
        assert s.evaluate(Fraction(1, 2)) == Fraction(11, 4)
        assert s.evaluate(0.5) == pytest.approx(2.75)

    def test_valuation(self) -> None:
        assert _series(0, 0, 4).valuation() == 2
        assert TruncatedSeries.zero(3).valuation() is None

    def test_index_past_order(self) -> None:
        with pytest.raises(IndexError, match="beyond truncation order"):
            _series(1, 2)[2]

    def test_cannot_extend(self) -> None:
        with pytest.raises(ValueError, match="cannot extend"):
            _series(1, 2).truncate(3)

    def test_format(self) -> None:
        assert _series(0, 0, 2, 0, -1).format() == "2*c1^2 - c1^4 + O(c1^5)"
        assert _series(0, -1, "2/3").format() == "-c1 + 2*c1^2/3 + O(c1^3)"

    def test_to_strings(self) -> None:
        assert _series(0, "-2/4", 3).to_strings() == ["0", "-1/2", "3"]


class TestPolynomialField:
    def test_variables(self) -> None:
        assert build_field(3, 1, 1).variables == ("c1", "c2", "c3", "w")

    def test_w_pivot_is_minus_alpha(self) -> None:
        field = build_field(4, Fraction(5, 2), 3)
        assert field.coefficient(4, field.monomial(w=1)) == Fraction(-5, 2)

    def test_chain_matrix(self) -> None:
        assert build_field(3, 1, 1).chain_matrix() == [[-1, 1], [0, -1]]
        assert build_field(3, 1, 2).chain_matrix() == [[-2, 2], [0, -2]]

    def test_monomer_component_vanishes_on_the_slow_curve(self) -> None:
        field = build_field(2, 1, 1)
        c1 = Fraction(1, 3)
        assert field.evaluate([c1, Fraction(0), 2 * c1 * c1])[0] == 0

    def test_float_evaluation(self) -> None:
        field = build_field(2, 1, 1)
        exact = field.evaluate([Fraction(1, 4), Fraction(1, 2), Fraction(1, 8)])
        approx = field.evaluate([0.25, 0.5, 0.125])
        assert list(approx) == pytest.approx([float(x) for x in exact])

    def test_rejects_wrong_point(self) -> None:
        with pytest.raises(ValueError, match="expected 3 coordinates"):
            build_field(2, 1, 1).evaluate([1, 2])

    def test_rejects_unknown_variable(self) -> None:
        with pytest.raises(KeyError, match="unknown variables"):
            build_field(2, 1, 1).monomial(c7=1)

    @pytest.mark.parametrize(
        ("i", "alpha", "beta", "message"),
        [
            (1, 1, 1, "i must be ≥ 2"),
            (2, 0, 1, "must be positive"),
            (2, 1, -1, "must be positive"),
        ],
    )
    def test_validation(self, i: int, alpha: int, beta: int, message: str) -> None:
        with pytest.raises(ValueError, match=message):
            build_field(i, alpha, beta)

    def test_format_lists_terms(self) -> None:
        text = build_field(2, 1, 1).format(0)
        assert "c1*w" in text
        assert "c1^3" in text
