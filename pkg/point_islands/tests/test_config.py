from fractions import Fraction
from pathlib import Path

import pytest
from pydantic import ValidationError

from point_islands.config import (
    IntegrationConfig,
    ModelParams,
    RunConfig,
    build_params,
    default_order,
)
from point_islands.utils import env, format_rational, to_fraction


class TestModelParams:
    def test_scaled_rate_is_exact(self) -> None:
        params = ModelParams(i=5, alpha_tilde=2, beta=3)
        assert params.alpha == Fraction(2, 9)
        assert params.n == 6

    def test_scaled_view_has_unit_beta(self) -> None:
        scaled = build_params(3, "5", "7").scaled
        assert scaled.beta == 1
        assert scaled.alpha == Fraction(5, 49)

    def test_rejects_small_critical_size(self) -> None:
        with pytest.raises(ValidationError, match="i must be ≥ 2, got 1"):
            build_params(1, 1, 1)

    @pytest.mark.parametrize("field", ["alpha_tilde", "beta"])
    def test_rejects_non_positive_rates(self, field: str) -> None:
        values = {"i": 2, "alpha_tilde": 1, "beta": 1, field: 0}
        with pytest.raises(ValidationError, match=f"{field} must be positive"):
            ModelParams(**values)

    def test_dumps_rationals_as_strings(self) -> None:
        dumped = build_params(2, "3/6", 2).model_dump(mode="json")
        assert dumped == {"i": 2, "alpha_tilde": "1/2", "beta": "2"}


class TestIntegrationConfig:
    def test_schedule_defaults_to_final_time(self) -> None:
        assert IntegrationConfig(t_end=5.0).schedule == (5.0,)

    def test_with_horizon_replaces_schedule(self) -> None:
        config = IntegrationConfig(rtol=1e-6).with_horizon(10.0, (1.0, 10.0))
        assert config.schedule == (1.0, 10.0)
        assert config.rtol == 1e-6

    def test_rejects_unsorted_checkpoints(self) -> None:
        with pytest.raises(ValidationError, match="strictly ascending"):
            IntegrationConfig(t_end=10.0, checkpoints=(5.0, 1.0))

    def test_rejects_checkpoint_past_horizon(self) -> None:
        with pytest.raises(ValidationError, match="within"):
            IntegrationConfig(t_end=1.0, checkpoints=(0.5, 2.0))

    def test_rejects_non_positive_tolerance(self) -> None:
        with pytest.raises(ValidationError, match="must be positive"):
            IntegrationConfig(rtol=0.0)


class TestRunConfig:
    def test_series_order_defaults_to_2i_plus_6(self) -> None:
        config = RunConfig(command="expand", params=build_params(4, 1, 1))
        assert config.series_order == default_order(4) == 14

    def test_rejects_tiny_truncation(self) -> None:
        with pytest.raises(ValidationError, match=r"n_max must be ≥ i \+ 2 = 5"):
            RunConfig(command="simulate", params=build_params(3, 1, 1), n_max=4)

    def test_rejects_order_below_two(self) -> None:
        with pytest.raises(ValidationError, match="order must be ≥ 2"):
            RunConfig(command="expand", params=build_params(2, 1, 1), order=1)

    def test_output_dir_is_a_path(self) -> None:
        config = RunConfig(
            command="simulate", params=build_params(2, 1, 1), output_dir="runs"
        )
        assert config.output_dir == Path("runs")


class TestRationals:
    @pytest.mark.parametrize(
        ("value", "expected"),
        [
            (3, Fraction(3)),
            ("4/6", Fraction(2, 3)),
            ("0.25", Fraction(1, 4)),
            (0.1, Fraction(1, 10)),
            (Fraction(5, 7), Fraction(5, 7)),
        ],
    )
    def test_to_fraction(self, value: object, expected: Fraction) -> None:
        assert to_fraction(value) == expected

    @pytest.mark.parametrize("value", ["abc", "1/0", float("nan"), True, None])
    def test_to_fraction_rejects(self, value: object) -> None:
        with pytest.raises(ValueError):
            to_fraction(value)

    def test_format_rational(self) -> None:
        assert format_rational(Fraction(-6, 4)) == "-3/2"
        assert format_rational(Fraction(8, 4)) == "2"


class TestEnv:
    def test_env_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("POINT_ISLANDS_OUTPUT_DIR", raising=False)
        assert env("POINT_ISLANDS_OUTPUT_DIR", "out") == "out"

    def test_env_reads_the_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("POINT_ISLANDS_LOG_LEVEL", "DEBUG")
        assert env("POINT_ISLANDS_LOG_LEVEL", "INFO") == "DEBUG"
