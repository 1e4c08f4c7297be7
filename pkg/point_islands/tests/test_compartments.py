import random
from fractions import Fraction

import pytest

from point_islands.config import IntegrationConfig, build_params
from point_islands.core.compartments import (
    FlowTerm,
    boundedness_check,
    chain_spectrum,
    decompose,
    equilibrium,
    flow_terms,
    monotonicity_check,
    verify_equilibrium,
)
from point_islands.core.model import rhs_closed
from point_islands.testing import random_rational_state


class TestDecompose:
    def test_dimer_flows(self) -> None:
        split = decompose(2, 1, [Fraction(1), Fraction(1)])
        assert split.flow(2, 1) == 2
        assert split.flow(1, 2) == 2
        assert split.outflows() == (1, 2)
        assert split.inputs == (1, 0)
        assert split.reconstruct() == (0, -1)

    @pytest.mark.parametrize("i", [2, 3, 4, 5, 6])
    def test_reconstructs_closed_chain(self, i: int) -> None:
        rng = random.Random(i)
        params = build_params(i, Fraction(3, 2), 1)
        for _ in range(100):
            state = random_rational_state(rng, i)
            rebuilt = decompose(i, params.alpha, state).reconstruct()
            assert rebuilt == tuple(rhs_closed(params, state))

    def test_float_states(self) -> None:
        params = build_params(3, "2/3", 1)
        state = [0.3, 0.2, 0.1]
        rebuilt = decompose(3, "2/3", state).reconstruct()
        assert list(rebuilt) == pytest.approx(list(rhs_closed(params, state)))

    def test_flow_names(self) -> None:
        names = {t.name for t in flow_terms(3)}
        assert {"F2,1", "F3,1", "F3,2", "F1,2", "F1,3", "F2,3", "F0,1", "F0,3"} == names

    def test_rejects_negative_state(self) -> None:
        with pytest.raises(ValueError, match="non-negative"):
            decompose(2, 1, [1.0, -0.5])

    def test_rejects_wrong_length(self) -> None:
        with pytest.raises(ValueError, match="expected 3 concentrations"):
            decompose(3, 1, [1.0, 1.0])


class TestMonotonicity:
    @pytest.mark.parametrize("i", [2, 4, 7])
    def test_every_flow_is_a_positive_monomial(self, i: int) -> None:
        report = monotonicity_check(i)
        assert report.passed
        assert report.witness is None
        assert len(report.flows) == len(flow_terms(i))

    def test_negative_flow_is_caught(self) -> None:
        bad = FlowTerm(target=1, source=2, coefficient=-1, exponents=(1, 1))
        report = monotonicity_check(2, extra=[bad])
        assert not report.passed
        assert report.witness == "F1,2"

    def test_monomial_rendering(self) -> None:
        term = FlowTerm(target=2, source=1, coefficient=2, exponents=(2, 0))
        assert term.monomial() == "2*c1^2"


class TestEquilibrium:
    @pytest.mark.parametrize(
        ("i", "alpha", "expected"),
        [
            (2, 8, (Fraction(2), Fraction(4, 3))),
            (2, Fraction(3, 2), (Fraction(1), Fraction(1, 2))),
            (3, Fraction(64, 7), (Fraction(2), Fraction(12, 7), Fraction(8, 7))),
        ],
    )
    def test_rational_points(
        self, i: int, alpha: Fraction, expected: tuple[Fraction, ...]
    ) -> None:
        point = equilibrium(i, alpha)
        assert point.exact
        assert point.values == expected
        assert all(r == 0 for r in verify_equilibrium(i, alpha, point.values))

    @pytest.mark.parametrize("i", range(2, 11))
    def test_rest_point_for_rational_monomers(self, i: int) -> None:
        c = Fraction(1, 2)
        alpha = (i + 1) * c ** (i + 1) / sum(c**k for k in range(i))
        point = equilibrium(i, alpha)
        assert point.values[0] == c
        assert not any(verify_equilibrium(i, alpha, point.values))

    def test_irrational_root(self) -> None:
        point = equilibrium(3, 2)
        assert not point.exact
        residual = verify_equilibrium(3, 2, [float(v) for v in point.values])
        assert max(abs(r) for r in residual) <= 2e-12

    def test_power_point_leaves_a_residual(self) -> None:
        assert verify_equilibrium(3, 16, (2, 4, 8)) == (0, 0, -16)

    def test_sup_norm(self) -> None:
        assert equilibrium(2, 8).sup_norm == 2.0

    def test_rejects_bad_alpha(self) -> None:
        with pytest.raises(ValueError, match="alpha must be positive"):
            equilibrium(2, 0)


class TestSpectrum:
    @pytest.mark.parametrize("i", [2, 3, 6])
    def test_chain_block(self, i: int) -> None:
        assert chain_spectrum(i) == {Fraction(-1): i - 1}


class TestBoundedness:
    def test_short_runs_stay_bounded(self) -> None:
        params = build_params(2, 1, 1)
        initials = [[10.0, 0.0], [0.0, 10.0], [3.0, 7.0]]
        config = IntegrationConfig(rtol=1e-7, atol=1e-10)
        report = boundedness_check(params, initials, t_end=50.0, config=config)
        assert report.passed
        assert report.runs == 3
        assert report.worst <= 1.0

    def test_needs_initial_states(self) -> None:
        with pytest.raises(ValueError, match="at least one"):
            boundedness_check(build_params(2, 1, 1), [])

    def test_horizon_must_outlast_the_transient(self) -> None:
        with pytest.raises(ValueError, match="t_end must exceed transient"):
            boundedness_check(build_params(2, 1, 1), [[1.0, 1.0]], t_end=1.0)

    def test_long_transient(self) -> None:
        params = build_params(2, 1, 1)
        config = IntegrationConfig(rtol=1e-7, atol=1e-10)
        loose = boundedness_check(params, [[0.0, 10.0]], 50.0, 20.0, config)
        assert loose.passed
        assert loose.transient == 20.0
