"""point-islands: rate equations of point-island nucleation and growth.

Simulates the truncated infinite system, expands its centre manifold exactly
over the rationals, compares it with the quasi-steady-state approximation and
checks the large-time laws against simulation.

Basic usage:
    from point_islands import build_params, solve_centre_manifold, build_field

    expansion = solve_centre_manifold(build_field(5, 1, 1), 15)
    print(expansion.reduced_ode.format())

    from point_islands import IntegrationConfig, simulate_truncated

    params = build_params(2, alpha_tilde=1, beta=1)
    trajectory = simulate_truncated(params, IntegrationConfig(t_end=1e3))
"""

from importlib.metadata import PackageNotFoundError, version

from point_islands.analysis.asymptotics import (
    AsymptoticLaw,
    InsufficientDataError,
    Quantity,
    cluster_ratios,
    cm_distance,
    fit_power_law,
    leading_law,
    profile_deviation,
    psi,
    similarity_snapshot,
    slope_fit,
)
from point_islands.config import (
    IntegrationConfig,
    ModelParams,
    RunConfig,
    System,
    Units,
    build_params,
)
from point_islands.core.compartments import (
    boundedness_check,
    chain_spectrum,
    decompose,
    equilibrium,
    monotonicity_check,
    verify_equilibrium,
)
from point_islands.core.integrator import (
    IntegrationError,
    NegativityViolation,
    NonFiniteState,
    StepBudgetExceeded,
    StepSizeUnderflow,
    Trajectory,
    integrate,
    log_checkpoints,
)
from point_islands.core.model import (
    DimensionError,
    ReducedState,
    TruncatedState,
    convert_units,
    observables,
    rhs_closed,
    rhs_reduced,
    rhs_truncated,
)
from point_islands.core.simulate import (
    auto_n_max,
    simulate_closed,
    simulate_reduced,
    simulate_truncated,
)
from point_islands.core.verify import run_verify
from point_islands.observability.metrics import BUILD_INFO
from point_islands.series.centre_manifold import (
    CentreManifoldExpansion,
    PivotError,
    solve_centre_manifold,
)
from point_islands.series.field import PolynomialField, build_field
from point_islands.series.qssa import (
    ParameterMismatch,
    compare_expansions,
    qssa_closed_form,
    qssa_expansion,
)
from point_islands.series.symbolic import SymbolicFlow, symbolic_reduced_ode
from point_islands.series.truncated import TruncatedSeries
from point_islands.utils import env

try:
    __version__ = version("point-islands")
except PackageNotFoundError:
    __version__ = "0.0.0"

BUILD_INFO.info({"version": __version__})

__all__ = [
    "ModelParams",
    "IntegrationConfig",
    "RunConfig",
    "System",
    "Units",
    "build_params",
    "env",
    "TruncatedSeries",
    "PolynomialField",
    "build_field",
    "CentreManifoldExpansion",
    "PivotError",
    "solve_centre_manifold",
    "ParameterMismatch",
    "qssa_closed_form",
    "qssa_expansion",
    "compare_expansions",
    "SymbolicFlow",
    "symbolic_reduced_ode",
    "TruncatedState",
    "ReducedState",
    "DimensionError",
    "rhs_truncated",
    "rhs_reduced",
    "rhs_closed",
    "observables",
    "convert_units",
    "Trajectory",
    "IntegrationError",
    "StepBudgetExceeded",
    "NegativityViolation",
    "NonFiniteState",
    "StepSizeUnderflow",
    "integrate",
    "log_checkpoints",
    "auto_n_max",
    "simulate_truncated",
    "simulate_reduced",
    "simulate_closed",
    "decompose",
    "monotonicity_check",
    "equilibrium",
    "verify_equilibrium",
    "chain_spectrum",
    "boundedness_check",
    "Quantity",
    "AsymptoticLaw",
    "InsufficientDataError",
    "leading_law",
    "psi",
    "similarity_snapshot",
    "profile_deviation",
    "fit_power_law",
    "slope_fit",
    "cluster_ratios",
    "cm_distance",
    "run_verify",
]
