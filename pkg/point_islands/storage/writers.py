"""Tabular and JSON output files."""

from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from point_islands.analysis.asymptotics import SimilaritySnapshot
from point_islands.config import ModelParams, OutputFormat, System, Units
from point_islands.core.integrator import Trajectory
from point_islands.core.model import TruncatedState, observables
from point_islands.core.simulate import truncated_states
from point_islands.observability.logging import log


def state_columns(system: System, width: int) -> list[str]:
    if system is System.TRUNCATED:
        return [f"c_{j}" for j in range(1, width - 1)] + [
            "overflow_count",
            "overflow_mass",
        ]
    if system is System.REDUCED:
        return [f"c_{j}" for j in range(1, width)] + ["y"]
    return [f"c_{j}" for j in range(1, width + 1)]


def trajectory_frame(
    trajectory: Trajectory, params: ModelParams, units: Units = Units.SCALED
) -> pd.DataFrame:
    """One row per checkpoint: ``T, rho, tau`` then the state components.

    The first row is the initial state at ``T = 0`` even when the schedule
    starts later. Physical units rescale time and concentrations; rho and tau
    stay scaled.
    """
    values, times = trajectory.values, trajectory.times
    rho, tau = trajectory.rho, trajectory.tau
    if times.size == 0 or times[0] > 0:
        values = np.vstack((trajectory.initial, values))
        times, rho, tau = (np.concatenate(([0.0], col)) for col in (times, rho, tau))
    time_column = "T"
    if units is Units.PHYSICAL:
        beta = float(params.beta)
        values, times, time_column = values * beta, times / beta, "t"
    frame = pd.DataFrame(
        values, columns=state_columns(trajectory.system, values.shape[1])
    )
    frame.insert(0, "tau", tau)
    frame.insert(0, "rho", rho)
    frame.insert(0, time_column, times)
    return frame


def observables_frame(trajectory: Trajectory, params: ModelParams) -> pd.DataFrame:
    """Mass, number, v, w and the tail rate at each checkpoint (scaled)."""
    alpha = float(params.alpha)
    rows = []
    for state in truncated_states(trajectory):
        obs = observables(params, state)
        rows.append(
            {
                "T": state.time,
                "mass": obs.mass,
                "number": obs.number,
                "v": obs.v,
                "w": obs.w,
                "tail_rate": obs.tail_rate,
            }
        )
    frame = pd.DataFrame(rows)
    start = TruncatedState.from_vector(trajectory.initial, 0.0)
    initial_mass = float(observables(params, start).mass)
    frame["mass_residual"] = frame["mass"] - initial_mass - alpha * frame["T"]
    return frame


def snapshot_frame(snapshot: SimilaritySnapshot) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "j": snapshot.sizes,
            "eta": snapshot.eta,
            "c_j": snapshot.concentrations,
            "scaled": snapshot.scaled,
            "normalised": snapshot.normalised,
            "psi": snapshot.profile,
        }
    )


def write_frame(frame: pd.DataFrame, path: Path, fmt: OutputFormat) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt is OutputFormat.CSV:
        frame.to_csv(path, index=False)
    else:
        frame.to_json(path, orient="records", double_precision=15)
    log.info("file_written", path=str(path), rows=len(frame))
    return path


def write_json(record: BaseModel, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.model_dump_json(indent=2) + "\n", encoding="utf-8")
    log.info("file_written", path=str(path))
    return path
