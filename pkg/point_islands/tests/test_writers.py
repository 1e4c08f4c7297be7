import io
import json
from pathlib import Path

import pandas as pd
import pytest

from point_islands.analysis.asymptotics import similarity_snapshot
from point_islands.config import (
    IntegrationConfig,
    ModelParams,
    OutputFormat,
    System,
    Units,
    build_params,
)
from point_islands.core.integrator import log_checkpoints
from point_islands.core.simulate import (
    simulate_reduced,
    simulate_truncated,
    truncated_states,
)
from point_islands.schemas.records import ParamsRecord, json_number
from point_islands.storage.writers import (
    observables_frame,
    snapshot_frame,
    state_columns,
    trajectory_frame,
    write_frame,
    write_json,
)


def _config() -> IntegrationConfig:
    return IntegrationConfig(t_end=20.0, checkpoints=log_checkpoints(1.0, 20.0, 5))


class TestColumns:
    def test_truncated(self) -> None:
        assert state_columns(System.TRUNCATED, 5) == [
            "c_1",
            "c_2",
            "c_3",
            "overflow_count",
            "overflow_mass",
        ]

    def test_reduced(self) -> None:
        assert state_columns(System.REDUCED, 3) == ["c_1", "c_2", "y"]

    def test_closed(self) -> None:
        assert state_columns(System.CLOSED, 2) == ["c_1", "c_2"]


class TestFrames:
    def test_scaled_trajectory(self, params_i2: ModelParams) -> None:
        run = simulate_truncated(params_i2, _config(), n_max=8)
        frame = trajectory_frame(run, params_i2)
        assert list(frame.columns[:4]) == ["T", "rho", "tau", "c_1"]
        assert list(frame.columns[-2:]) == ["overflow_count", "overflow_mass"]
        assert len(frame) == len(run) + 1
        assert frame["T"].iloc[0] == 0.0
        assert frame["c_1"].iloc[0] == 0.0
        assert frame["T"].iloc[1:].tolist() == run.times.tolist()

    def test_physical_trajectory(self) -> None:
        params = build_params(2, 4, 2)
        run = simulate_reduced(params, _config())
        scaled = trajectory_frame(run, params)
        physical = trajectory_frame(run, params, Units.PHYSICAL)
        assert "t" in physical.columns
        assert physical["t"].iloc[-1] == pytest.approx(10.0)
        pd.testing.assert_series_equal(physical["c_1"], 2 * scaled["c_1"])
        pd.testing.assert_series_equal(physical["rho"], scaled["rho"])

    def test_schedule_from_zero_has_no_extra_row(self, params_i2: ModelParams) -> None:
        config = IntegrationConfig(t_end=5.0, checkpoints=(0.0, 1.0, 5.0))
        run = simulate_truncated(params_i2, config, n_max=8)
        frame = trajectory_frame(run, params_i2)
        assert frame["T"].tolist() == [0.0, 1.0, 5.0]

    def test_observables_track_deposition(self, params_i2: ModelParams) -> None:
        run = simulate_truncated(params_i2, _config(), n_max=40)
        frame = observables_frame(run, params_i2)
        assert list(frame.columns) == [
            "T",
            "mass",
            "number",
            "v",
            "w",
            "tail_rate",
            "mass_residual",
        ]
        assert frame["mass_residual"].abs().max() <= 1e-5

    def test_snapshot(self, params_i2: ModelParams) -> None:
        run = simulate_truncated(params_i2, _config(), n_max=40)
        snap = similarity_snapshot(params_i2, truncated_states(run)[-1])
        frame = snapshot_frame(snap)
        assert list(frame["j"]) == list(range(1, 41))
        assert list(frame.columns) == ["j", "eta", "c_j", "scaled", "normalised", "psi"]


class TestFiles:
    def test_csv(self, tmp_path: Path) -> None:
        frame = pd.DataFrame({"T": [0.0, 1.0], "c_1": [0.0, 0.5]})
        path = write_frame(frame, tmp_path / "nested" / "run.csv", OutputFormat.CSV)
        assert path.read_text().splitlines()[0] == "T,c_1"
        pd.testing.assert_frame_equal(pd.read_csv(path), frame)

    def test_json_records(self, tmp_path: Path) -> None:
        frame = pd.DataFrame({"T": [0.0, 1.0], "c_1": [0.0, 0.5]})
        path = write_frame(frame, tmp_path / "run.json", OutputFormat.JSON)
        assert json.loads(path.read_text()) == [
            {"T": 0.0, "c_1": 0.0},
            {"T": 1.0, "c_1": 0.5},
        ]

    def test_record(self, tmp_path: Path, log_stream: io.StringIO) -> None:
        record = ParamsRecord.from_params(build_params(3, "3/2", 2))
        path = write_json(record, tmp_path / "params.json")
        data = json.loads(path.read_text())
        assert data == {"i": 3, "alpha_tilde": "3/2", "beta": "2", "alpha": "3/8"}
        assert "file_written" in log_stream.getvalue()


class TestJsonNumber:
    def test_exact_values(self) -> None:
        assert json_number(3) == "3"

    def test_floats(self) -> None:
        assert json_number(0.5) == 0.5
        assert json_number(True) == 1.0
