import io
import json
import math

import numpy as np
import pytest

from point_islands.config import IntegrationConfig, ModelParams, System
from point_islands.core.integrator import (
    ERROR_WEIGHTS,
    NODES,
    STAGES,
    IntegrationError,
    NegativityViolation,
    StepBudgetExceeded,
    StepStats,
    front_position,
    integrate,
    log_checkpoints,
)
from point_islands.core.model import reduced_field
from point_islands.testing import fixed_step_rk4


def _decay(_t: float, y: np.ndarray) -> np.ndarray:
    return -y


class TestTableau:
    def test_rows_sum_to_nodes(self) -> None:
        for row, node in zip(STAGES[:-1], NODES[1:-1]):
            assert row.sum() == pytest.approx(node, abs=1e-15)

    def test_weights_are_consistent(self) -> None:
        assert STAGES[-1].sum() == pytest.approx(1.0, abs=1e-15)
        assert ERROR_WEIGHTS.sum() == pytest.approx(0.0, abs=1e-15)


class TestLogCheckpoints:
    def test_endpoints_are_exact(self) -> None:
        grid = log_checkpoints(1.0, 100.0, 3)
        assert grid[0] == 1.0
        assert grid[1] == pytest.approx(10.0)
        assert grid[-1] == 100.0

    @pytest.mark.parametrize(
        ("start", "end", "count"), [(0.0, 1.0, 3), (2.0, 1.0, 3), (1.0, 2.0, 1)]
    )
    def test_rejects_bad_ranges(self, start: float, end: float, count: int) -> None:
        with pytest.raises(ValueError):
            log_checkpoints(start, end, count)


class TestIntegrate:
    def test_exponential_decay(self) -> None:
        config = IntegrationConfig(t_end=1.0, checkpoints=(0.5, 1.0))
        run = integrate(_decay, np.array([1.0]), config)
        np.testing.assert_allclose(run.times, [0.5, 1.0])
        assert run.values[-1, 0] == pytest.approx(math.exp(-1.0), rel=1e-7)
        assert run.values[0, 0] == pytest.approx(math.exp(-0.5), rel=1e-7)

    def test_rho_is_the_monomer_integral(self) -> None:
        run = integrate(_decay, np.array([1.0]), IntegrationConfig(t_end=2.0))
        assert run.rho[-1] == pytest.approx(1 - math.exp(-2.0), rel=1e-7)

    def test_tau_uses_the_regularised_integrand(self) -> None:
        config = IntegrationConfig(t_end=1.0, tau_floor=1e-8)
        run = integrate(_decay, np.array([1.0]), config)
        # int e^t dT over [0, 1]
        assert run.tau[-1] == pytest.approx(math.e - 1, rel=1e-6)

    def test_zero_horizon_echoes_the_initial_state(self) -> None:
        run = integrate(_decay, np.array([0.3, 0.7]), IntegrationConfig(t_end=0.0))
        assert len(run) == 1
        np.testing.assert_array_equal(run.final, [0.3, 0.7])
        assert run.stats.accepted == 0

    def test_matches_fixed_step_reference(self, params_i2: ModelParams) -> None:
        field = reduced_field(params_i2)
        start = np.array([0.5, 0.2, 0.0])
        config = IntegrationConfig(t_end=20.0, rtol=1e-10, atol=1e-13)
        run = integrate(field, start, config, System.REDUCED)
        reference = fixed_step_rk4(field, start, 20.0, 1e-3)
        np.testing.assert_allclose(run.final, reference, rtol=1e-8, atol=1e-11)

    def test_peak_is_tracked_between_checkpoints(self) -> None:
        def wave(t: float, _y: np.ndarray) -> np.ndarray:
            return np.array([math.cos(t)])

        config = IntegrationConfig(t_end=2 * math.pi, rtol=1e-10, atol=1e-12)
        run = integrate(wave, np.array([1.0]), config)
        assert run.final[0] == pytest.approx(1.0, abs=1e-8)
        # 1 + sin T peaks at 2 between the start and the only checkpoint
        assert run.stats.peak > 1.9
        assert run.stats.peak <= 2.0 + 1e-8

    def test_stats_hold_no_wall_clock(self) -> None:
        assert "duration_ms" not in StepStats.model_fields
        run = integrate(_decay, np.array([1.0]), IntegrationConfig(t_end=1.0))
        again = integrate(_decay, np.array([1.0]), IntegrationConfig(t_end=1.0))
        assert run.stats == again.stats

    def test_halving_tolerances_stays_within_the_coarse_budget(
        self, params_i2: ModelParams
    ) -> None:
        field = reduced_field(params_i2)
        start = np.array([0.5, 0.2, 0.0])
        schedule = log_checkpoints(1.0, 20.0, 5)
        coarse_config = IntegrationConfig(
            t_end=20.0, checkpoints=schedule, rtol=1e-6, atol=1e-9
        )
        fine_config = coarse_config.model_copy(update={"rtol": 5e-7, "atol": 5e-10})
        coarse = integrate(field, start, coarse_config, System.REDUCED)
        fine = integrate(field, start, fine_config, System.REDUCED)
        # every accepted step may contribute up to one local tolerance
        budget = coarse.stats.accepted * (1e-9 + 1e-6 * np.abs(coarse.values[:, 0]))
        change = np.abs(fine.values[:, 0] - coarse.values[:, 0])
        assert np.all(change < budget)

    def test_step_budget(self) -> None:
        config = IntegrationConfig(t_end=100.0, max_steps=2)
        with pytest.raises(StepBudgetExceeded, match="2 steps exhausted"):
            integrate(_decay, np.array([1.0]), config)

    def test_negativity(self) -> None:
        def drain(_t: float, y: np.ndarray) -> np.ndarray:
            return -np.ones_like(y)

        config = IntegrationConfig(t_end=2.0, tau_floor=1.0)
        with pytest.raises(NegativityViolation, match="component 0") as info:
            integrate(drain, np.array([1.0]), config)
        assert info.value.time > 1.0
        assert info.value.reason == "negativity"

    def test_blow_up_is_reported(self) -> None:
        def square(_t: float, y: np.ndarray) -> np.ndarray:
            return y * y

        with pytest.raises(IntegrationError):
            integrate(square, np.array([1.0]), IntegrationConfig(t_end=2.0))

    def test_rejects_negative_start(self) -> None:
        with pytest.raises(ValueError, match="non-negative"):
            integrate(_decay, np.array([-1.0]), IntegrationConfig())

    def test_rejects_mismatched_field(self) -> None:
        with pytest.raises(ValueError, match="field returns 1 components"):
            integrate(lambda _t, y: y[:1], np.array([1.0, 2.0]), IntegrationConfig())

    def test_front_position_follows_rho(self) -> None:
        run = integrate(_decay, np.array([1.0]), IntegrationConfig(t_end=1.0))
        assert front_position(run, 3)[-1] == pytest.approx(run.rho[-1] + 3)

    def test_logs_start_and_finish(self, log_stream: io.StringIO) -> None:
        integrate(_decay, np.array([1.0]), IntegrationConfig(t_end=1.0))
        lines = log_stream.getvalue().splitlines()
        events = [json.loads(line)["event"] for line in lines]
        assert events[0] == "integration_started"
        assert "checkpoint_reached" in events
        assert events[-1] == "integration_finished"
