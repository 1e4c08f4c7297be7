from fractions import Fraction

import pytest
import sympy

from point_islands.series.centre_manifold import solve_centre_manifold
from point_islands.series.field import build_field
from point_islands.series.symbolic import (
    ALPHA,
    BETA,
    InterpolationError,
    SymbolicFlow,
    symbolic_reduced_ode,
)
from point_islands.testing import reference_reduced_ode


@pytest.fixture(scope="module")
def flow_i5() -> SymbolicFlow:
    return symbolic_reduced_ode(5, 15)


class TestReferenceFlow:
    def test_leading_coefficients(self, flow_i5: SymbolicFlow) -> None:
        assert sympy.simplify(flow_i5[8] + 1 / (ALPHA * BETA**4)) == 0
        assert sympy.simplify(flow_i5[15] + 80 / (ALPHA**2 * BETA**9)) == 0
        mixed = (30 * BETA**2 + ALPHA) / (ALPHA**2 * BETA**10)
        assert sympy.simplify(flow_i5[14] - mixed) == 0

    def test_only_nonzero_powers_are_kept(self, flow_i5: SymbolicFlow) -> None:
        assert sorted(flow_i5.coefficients) == [8, 9, 13, 14, 15]
        assert flow_i5[10] == 0

    @pytest.mark.parametrize(
        ("alpha", "beta"), [(1, 1), (2, 3), (Fraction(1, 2), Fraction(5, 3))]
    )
    def test_evaluates_to_the_reference(
        self, flow_i5: SymbolicFlow, alpha: Fraction | int, beta: Fraction | int
    ) -> None:
        series = flow_i5.evaluate(alpha, beta)
        for power, expected in reference_reduced_ode(alpha, beta).items():
            assert series[power] == expected, power

    def test_format(self, flow_i5: SymbolicFlow) -> None:
        text = flow_i5.format()
        assert text.startswith("-1/(α*β**4)*c1^8 + 1/(α*β**5)*c1^9")
        assert text.endswith("+ O(c1^16)")

    def test_beyond_order(self, flow_i5: SymbolicFlow) -> None:
        with pytest.raises(IndexError, match="beyond truncation order 15"):
            flow_i5[16]


class TestAgainstNumericSolves:
    @pytest.mark.parametrize("i", [2, 3])
    def test_every_power_matches(self, i: int) -> None:
        order = 2 * i + 6
        flow = symbolic_reduced_ode(i, order)
        for alpha, beta in [(Fraction(3, 2), Fraction(5, 2)), (7, Fraction(1, 3))]:
            numeric = solve_centre_manifold(build_field(i, alpha, beta), order)
            assert flow.evaluate(alpha, beta) == numeric.reduced_ode

    def test_degree_cap(self) -> None:
        with pytest.raises(InterpolationError, match="degree ≤ 0"):
            symbolic_reduced_ode(5, 15, max_degree=0)
