from fractions import Fraction

import pytest

from point_islands.config import build_params
from point_islands.core.model import rhs_closed
from point_islands.series.centre_manifold import solve_centre_manifold
from point_islands.series.field import build_field
from point_islands.series.qssa import (
    ParameterMismatch,
    compare_expansions,
    qssa_closed_form,
    qssa_expansion,
    qssa_formula_series,
    qssa_gw,
    qssa_series,
)
from point_islands.testing import qssa_gw_pattern


class TestClosedForm:
    def test_dimer(self) -> None:
        assert qssa_closed_form(2, 2) == {2: Fraction(4, 3)}

    def test_trimer(self) -> None:
        assert qssa_closed_form(3, 2) == {2: Fraction(12, 7), 3: Fraction(8, 7)}

    def test_float_input(self) -> None:
        values = qssa_closed_form(3, 0.5)
        assert values[3] == pytest.approx(0.125 / 1.75)

    def test_rejects_negative_monomers(self) -> None:
        with pytest.raises(ValueError, match="non-negative"):
            qssa_closed_form(2, -1)

    @pytest.mark.parametrize("i", [2, 3, 4, 6])
    def test_closed_form_is_a_rest_point_of_the_chain(self, i: int) -> None:
        params = build_params(i, Fraction(5, 3), 1)
        for c1 in (Fraction(1, 3), Fraction(2), Fraction(7, 5)):
            chain = qssa_closed_form(i, c1)
            state = [c1, *(chain[j] for j in range(2, i + 1))]
            # c_2 .. c_i are stationary; only c_1 moves
            assert list(rhs_closed(params, state)[1:]) == [0] * (i - 1)


class TestSeries:
    @pytest.mark.parametrize("i", [2, 3, 5])
    def test_division_matches_pattern(self, i: int) -> None:
        order = 3 * i + 4
        for j, series in qssa_series(i, order).items():
            assert series == qssa_formula_series(i, j, order)

    def test_pattern_terms(self) -> None:
        s = qssa_formula_series(3, 2, 9)
        assert s.coefficients == (0, 0, 1, 0, -1, 1, 0, -1, 1, 0)

    def test_order_floor(self) -> None:
        with pytest.raises(ValueError, match=r"order must be ≥ i \+ 1 = 4"):
            qssa_series(3, 3)

    @pytest.mark.parametrize(("i", "alpha"), [(2, Fraction(1)), (3, Fraction(5, 2))])
    def test_w_graph(self, i: int, alpha: Fraction) -> None:
        order = 3 * i + 4
        assert qssa_gw(i, alpha, order) == qssa_gw_pattern(i, alpha, order)

    def test_expansion_defaults(self) -> None:
        expansion = qssa_expansion(4, 3)
        assert expansion.order == 14
        assert sorted(expansion.series) == [2, 3, 4]
        assert expansion.beta == 1


class TestDivergence:
    @pytest.mark.parametrize("i", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("alpha", [Fraction(1), Fraction(2, 3), Fraction(5, 2)])
    def test_first_difference_at_2i_plus_4(self, i: int, alpha: Fraction) -> None:
        order = 2 * i + 6
        cm = solve_centre_manifold(build_field(i, alpha, 1), order)
        report = compare_expansions(cm, qssa_expansion(i, alpha, order))
        assert report.leading_terms_agree
        assert report.first_difference == 2 * i + 4
        assert report.checked_powers == (i + 3, i + 4, 2 * i + 3)

    def test_report_serialises(self) -> None:
        cm = solve_centre_manifold(build_field(5, 1, 1), 16)
        report = compare_expansions(cm, qssa_expansion(5, 1, 16))
        dumped = report.model_dump(mode="json")
        assert dumped["first_difference"] == 14
        assert dumped["alpha"] == "1"
        row = {"power": 8, "cm": "-1", "qssa": "-1", "equal": True}
        assert dumped["rows"][8] == row

    def test_order_mismatch(self) -> None:
        cm = solve_centre_manifold(build_field(2, 1, 1), 8)
        with pytest.raises(ParameterMismatch, match="cannot compare"):
            compare_expansions(cm, qssa_expansion(2, 1, 10))

    def test_needs_scaled_units(self) -> None:
        cm = solve_centre_manifold(build_field(2, 1, 3), 10)
        with pytest.raises(ParameterMismatch, match="beta = 1"):
            compare_expansions(cm, qssa_expansion(2, 1, 10))
