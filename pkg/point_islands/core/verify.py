"""Acceptance suite run by ``point-islands verify``.

Late-time asymptotic checks integrate the reduced system, which carries the
same c_1..c_i as the full system; only the similarity profile needs the
size distribution and therefore the truncated system.
"""

import random
import time
from collections.abc import Callable, Iterable
from fractions import Fraction

import numpy as np
from pydantic import BaseModel

from point_islands.analysis.asymptotics import (
    InsufficientDataError,
    Quantity,
    cluster_ratios,
    cm_distance,
    fixed_exponent_amplitude,
    leading_law,
    profile_deviation,
    similarity_snapshot,
    slope_fit,
)
from point_islands.config import IntegrationConfig, ModelParams, Units, build_params
from point_islands.core.compartments import (
    boundedness_check,
    chain_spectrum,
    decompose,
    equilibrium,
    monotonicity_check,
    verify_equilibrium,
)
from point_islands.core.integrator import IntegrationError, Trajectory, log_checkpoints
from point_islands.core.model import (
    ReducedState,
    observables,
    reduced_v,
    rhs_closed,
)
from point_islands.core.simulate import (
    reduced_states,
    simulate_reduced,
    simulate_truncated,
    truncated_states,
    truncation_adequacy,
)
from point_islands.observability.logging import log
from point_islands.observability.metrics import CHECKS
from point_islands.schemas.records import CriterionResult, VerifyReport
from point_islands.series.centre_manifold import solve_centre_manifold
from point_islands.series.field import build_field
from point_islands.series.qssa import compare_expansions, qssa_expansion
from point_islands.testing import (
    gj_pattern,
    gw_pattern,
    random_rational_state,
    reference_reduced_ode,
)


class Preset(BaseModel, frozen=True):
    """Which criteria run, for which i, and at which horizons."""

    name: str
    criteria: tuple[str, ...]
    exact_i: tuple[int, ...] = (2, 3, 4, 5, 6)
    simulated_i: tuple[int, ...] = (2, 3)
    conservation_time: float = 1e4
    equivalence_time: float = 1e3
    attraction_time: float = 1e4
    late_time: float = 1e5
    decay_time: float = 1e4
    bounded_time: float = 1e3
    random_starts: int = 20


ALL_CRITERIA = (
    "reference_reduced_ode",
    "centre_manifold_pattern",
    "cm_qssa_divergence",
    "equilibrium_residual",
    "compartment_identity",
    "chain_spectrum",
    "mass_conservation",
    "truncation_front",
    "tail_equivalence",
    "monomer_law",
    "cluster_ratios",
    "centre_manifold_attraction",
    "similarity_profile",
    "global_decay",
    "boundedness",
)

PRESETS = {
    "desk": Preset(name="desk", criteria=ALL_CRITERIA),
    "quick": Preset(
        name="quick",
        criteria=ALL_CRITERIA[:9] + ("boundedness",),
        conservation_time=1e3,
        bounded_time=1e2,
        random_starts=5,
    ),
}

SIM_ALPHA = Fraction(1)
SERIES_ALPHAS = (Fraction(1), Fraction(2, 3), Fraction(5, 2))


def _at(trajectory: Trajectory, t: float) -> int:
    return int(np.argmin(np.abs(trajectory.times - t)))


class Verifier:
    """Runs the criteria of a preset, sharing simulations between them.

    Args:
        preset: Preset to run.
        only_i: Restrict simulated critical sizes to these values.
        n_max: Force the truncation size of truncated runs.
        seed: Seed of the random states and initial conditions.
        integration: Base integrator settings for every run.
    """

    def __init__(
        self,
        preset: Preset,
        only_i: Iterable[int] | None = None,
        n_max: int | None = None,
        seed: int = 0,
        integration: IntegrationConfig | None = None,
    ) -> None:
        self.preset = preset
        chosen = set(only_i) if only_i else None
        self.simulated_i = tuple(
            i for i in preset.simulated_i if chosen is None or i in chosen
        ) or tuple(sorted(chosen or ()))
        self.n_max = n_max
        self.seed = seed
        self.integration = integration or IntegrationConfig()
        self._runs: dict[tuple[str, int, float], Trajectory] = {}

    def params(self, i: int) -> ModelParams:
        return build_params(i, SIM_ALPHA, 1)

    def truncated(self, i: int, t_end: float) -> Trajectory:
        key = ("truncated", i, t_end)
        if key not in self._runs:
            config = self.integration.with_horizon(
                t_end, log_checkpoints(1.0, t_end, 4 * round(np.log10(t_end)) + 1)
            )
            self._runs[key] = simulate_truncated(
                self.params(i), config, n_max=self.n_max
            )
        return self._runs[key]

    def reduced(self, i: int, t_end: float) -> Trajectory:
        key = ("reduced", i, t_end)
        if key not in self._runs:
            config = self.integration.with_horizon(
                t_end, log_checkpoints(1.0, t_end, 10 * round(np.log10(t_end)) + 1)
            )
            self._runs[key] = simulate_reduced(self.params(i), config)
        return self._runs[key]

    def run(self) -> VerifyReport:
        results = [self._check(name) for name in self.preset.criteria]
        report = VerifyReport(preset=self.preset.name, criteria=results)
        log.info(
            "verify_finished",
            preset=self.preset.name,
            passed=report.passed,
            failed=report.failed,
        )
        return report

    def _check(self, name: str) -> CriterionResult:
        check: Callable[[], CriterionResult] = getattr(self, f"check_{name}")
        started = time.perf_counter()
        try:
            result = check()
        except (IntegrationError, InsufficientDataError, ValueError) as exc:
            result = CriterionResult(name=name, passed=False, detail=str(exc))
        CHECKS.labels(criterion=name, outcome="pass" if result.passed else "fail").inc()
        log.info(
            "criterion_checked",
            criterion=name,
            passed=result.passed,
            measured=result.measured,
            duration_ms=round((time.perf_counter() - started) * 1000, 2),
        )
        return result

    def check_reference_reduced_ode(self) -> CriterionResult:
        started = time.perf_counter()
        mismatches = []
        for a, b in ((1, 1), (2, 3), (5, 7)):
            expansion = solve_centre_manifold(build_field(5, a, b), 15)
            for power, expected in reference_reduced_ode(a, b).items():
                if expansion.reduced_ode[power] != expected:
                    mismatches.append(f"(alpha={a}, beta={b}) power {power}")
        elapsed = time.perf_counter() - started
        log.debug("reference_flow_solved", ms=round(elapsed * 1000, 2))
        return CriterionResult(
            name="reference_reduced_ode",
            passed=not mismatches and elapsed < 10,
            measured=len(mismatches),
            tolerance="exact, < 10 s",
            detail="; ".join(mismatches),
        )

    def check_centre_manifold_pattern(self) -> CriterionResult:
        alpha = Fraction(7, 3)
        mismatches = []
        for i in self.preset.exact_i:
            order = 2 * i + 3
            expansion = solve_centre_manifold(build_field(i, alpha, 1), order)
            for j in range(2, i + 1):
                reliable = 2 * i if j == i else i + j + 1
                pattern = gj_pattern(i, j, order).truncate(reliable)
                if expansion.g[j].truncate(reliable) != pattern:
                    mismatches.append(f"i={i} g{j}")
            if expansion.g_w != gw_pattern(i, alpha, order):
                mismatches.append(f"i={i} gw")
        return CriterionResult(
            name="centre_manifold_pattern",
            passed=not mismatches,
            tolerance="exact",
            detail="; ".join(mismatches),
        )

    def check_cm_qssa_divergence(self) -> CriterionResult:
        failures = []
        for i in self.preset.exact_i:
            order = 2 * i + 6
            for alpha in SERIES_ALPHAS:
                cm = solve_centre_manifold(build_field(i, alpha, 1), order)
                report = compare_expansions(cm, qssa_expansion(i, alpha, order))
                diverges_at = report.first_difference
                if not report.leading_terms_agree or diverges_at != 2 * i + 4:
                    failures.append(
                        f"i={i} alpha={alpha}: first difference "
                        f"{report.first_difference}"
                    )
        return CriterionResult(
            name="cm_qssa_divergence",
            passed=not failures,
            tolerance="first difference at 2i+4",
            detail="; ".join(failures),
        )

    def check_equilibrium_residual(self) -> CriterionResult:
        failures = []
        for i in range(2, 11):
            for c in (Fraction(1), Fraction(2), Fraction(1, 2)):
                alpha = (i + 1) * c ** (i + 1) / sum(c**k for k in range(i))
                point = equilibrium(i, alpha)
                residual = verify_equilibrium(i, alpha, point.values)
                if not point.exact or point.values[0] != c or any(residual):
                    failures.append(f"i={i} c1={c}")
        worst = 0.0
        for i in (2, 3, 5):
            point = equilibrium(i, 2)
            residual = verify_equilibrium(i, 2, [float(v) for v in point.values])
            worst = max(worst, max(abs(float(r)) for r in residual) / 2)
        if worst > 1e-12:
            failures.append(f"float residual {worst:.3g}")
        return CriterionResult(
            name="equilibrium_residual",
            passed=not failures,
            measured=worst,
            tolerance=1e-12,
            detail="; ".join(failures),
        )

    def check_compartment_identity(self) -> CriterionResult:
        rng = random.Random(self.seed)
        failures = []
        for i in self.preset.exact_i:
            params = build_params(i, Fraction(3, 2), 1)
            for _ in range(100):
                state = random_rational_state(rng, i)
                rebuilt = decompose(i, params.alpha, state).reconstruct()
                if tuple(rhs_closed(params, state)) != rebuilt:
                    failures.append(f"i={i} state={[str(x) for x in state]}")
                    break
            if not monotonicity_check(i).passed:
                failures.append(f"i={i} monotonicity")
        return CriterionResult(
            name="compartment_identity",
            passed=not failures,
            tolerance="exact",
            detail="; ".join(failures),
        )

    def check_chain_spectrum(self) -> CriterionResult:
        failures = [
            f"i={i}"
            for i in self.preset.exact_i
            if chain_spectrum(i) != {Fraction(-1): i - 1}
        ]
        return CriterionResult(
            name="chain_spectrum", passed=not failures, detail="; ".join(failures)
        )

    def check_mass_conservation(self) -> CriterionResult:
        t_end = self.preset.conservation_time
        worst = 0.0
        for i in self.simulated_i:
            params = self.params(i)
            for state in truncated_states(self.truncated(i, t_end)):
                mass = float(observables(params, state).mass)
                drift = abs(mass - float(params.alpha) * state.time)
                worst = max(worst, drift / (float(params.alpha) * state.time + 1))
        return CriterionResult(
            name="mass_conservation",
            passed=worst <= 1e-6,
            measured=worst,
            tolerance=1e-6,
        )

    def check_truncation_front(self) -> CriterionResult:
        t_end = self.preset.conservation_time
        failures = []
        worst = 0.0
        for i in self.simulated_i:
            trajectory = self.truncated(i, t_end)
            n_max = trajectory.values.shape[1] - 2
            front = truncation_adequacy(trajectory, n_max, i)
            c = trajectory.final[:n_max]
            populated = np.nonzero(c > 1e-8 * c[i - 1])[0]
            reach = float(populated[-1] + 1) if populated.size else 0.0
            ratio = reach / front.front
            worst = max(worst, abs(np.log2(ratio)) if ratio > 0 else np.inf)
            if not front.adequate:
                failures.append(
                    f"i={i}: front {front.front:.1f} + {front.buffer:.1f} "
                    f"exceeds N_max={n_max}"
                )
            if not 0.5 <= ratio <= 2:
                failures.append(
                    f"i={i}: populated to {reach:.0f}, front {front.front:.1f}"
                )
        return CriterionResult(
            name="truncation_front",
            passed=not failures,
            measured=float(2**worst),
            tolerance=2.0,
            detail="; ".join(failures),
        )

    def check_tail_equivalence(self) -> CriterionResult:
        t_end = self.preset.equivalence_time
        worst = 0.0
        for i in self.simulated_i:
            full = truncated_states(self.truncated(i, t_end))
            reduced = reduced_states(self.reduced(i, t_end))
            last_full = min(full, key=lambda s: abs(s.time - t_end))
            last_reduced = min(reduced, key=lambda s: abs(s.time - t_end))
            tail = float(last_full.c[i:].sum()) + float(last_full.overflow_count)
            y = float(last_reduced.y)
            worst = max(worst, abs(tail - y) / max(abs(y), 1e-300))
        return CriterionResult(
            name="tail_equivalence",
            passed=worst <= 1e-6,
            measured=worst,
            tolerance=1e-6,
        )

    def check_monomer_law(self) -> CriterionResult:
        i = 2
        t_end = self.preset.late_time
        params = self.params(i)
        trajectory = self.reduced(i, t_end)
        window = (t_end / 10, t_end)
        law = leading_law(params, Quantity.MONOMER, units=Units.SCALED)
        fit = slope_fit(trajectory, 0, window)
        amplitude = fixed_exponent_amplitude(trajectory, 0, window, law.exponent)
        slope_error = abs(fit.slope / float(law.exponent) - 1)
        amplitude_error = abs(amplitude / law.amplitude - 1)
        return CriterionResult(
            name="monomer_law",
            passed=slope_error <= 0.05 and amplitude_error <= 0.10,
            measured=fit.slope,
            tolerance="slope 5 %, amplitude 10 %",
            detail=f"amplitude {amplitude:.6g} vs {law.amplitude:.6g}",
        )

    def check_cluster_ratios(self) -> CriterionResult:
        t_end = self.preset.late_time
        worst = 0.0
        for i in self.simulated_i:
            trajectory = self.reduced(i, t_end)
            c = trajectory.values[_at(trajectory, t_end), :i]
            c1 = float(c[0])
            for j, ratio in enumerate(cluster_ratios(c, i), start=2):
                expected = 1 - c1 ** (i + 1 - j)
                worst = max(worst, abs(ratio / expected - 1))
        return CriterionResult(
            name="cluster_ratios", passed=worst <= 0.05, measured=worst, tolerance=0.05
        )

    def check_centre_manifold_attraction(self) -> CriterionResult:
        t = self.preset.attraction_time
        worst = 0.0
        for i in self.simulated_i:
            expansion = solve_centre_manifold(build_field(i, SIM_ALPHA, 1))
            trajectory = self.reduced(i, max(t, self.preset.late_time))
            c = trajectory.values[_at(trajectory, t), :i]
            worst = max(worst, *cm_distance(c, expansion))
        return CriterionResult(
            name="centre_manifold_attraction",
            passed=worst <= 0.05,
            measured=worst,
            tolerance=0.05,
        )

    def check_similarity_profile(self) -> CriterionResult:
        i = 2
        t_end = self.preset.late_time
        params = self.params(i)
        config = self.integration.with_horizon(t_end)
        trajectory = simulate_truncated(params, config, n_max=self.n_max)
        state = truncated_states(trajectory)[-1]
        deviation = profile_deviation(similarity_snapshot(params, state))
        return CriterionResult(
            name="similarity_profile",
            passed=deviation <= 0.15,
            measured=deviation,
            tolerance=0.15,
            detail=f"N_max={trajectory.values.shape[1] - 2}",
        )

    def check_global_decay(self) -> CriterionResult:
        i = 2
        t_end = self.preset.decay_time
        params = self.params(i)
        law = leading_law(params, Quantity.MONOMER, units=Units.SCALED)
        expected_c1 = float(law.evaluate(t_end))
        rng = np.random.default_rng(self.seed)
        config = self.integration.with_horizon(t_end)
        failures = []
        for run in range(self.preset.random_starts):
            start = rng.uniform(0.0, 1.0, size=i + 1)
            initial = ReducedState(c=start[:i], y=float(start[i]))
            final = reduced_states(simulate_reduced(params, config, initial))[-1]
            c = final.c
            v = float(reduced_v(params, final))
            if (
                np.any(c[1:] >= 1e-2)
                or abs(c[0] / expected_c1 - 1) > 0.10
                or abs(v) > 1e-2
            ):
                failures.append(f"start {run}: c={c.round(5).tolist()} v={v:.3g}")
        return CriterionResult(
            name="global_decay",
            passed=not failures,
            measured=len(failures),
            tolerance=0,
            detail="; ".join(failures),
        )

    def check_boundedness(self) -> CriterionResult:
        params = self.params(2)
        rng = np.random.default_rng(self.seed + 1)
        initials = [
            rng.uniform(0.0, 10.0, size=params.i).tolist()
            for _ in range(self.preset.random_starts)
        ]
        report = boundedness_check(params, initials, self.preset.bounded_time)
        return CriterionResult(
            name="boundedness",
            passed=report.passed,
            measured=report.worst,
            tolerance=1.0,
            detail=f"bound {report.bound:.6g}",
        )


def run_verify(
    preset: str = "desk",
    only_i: Iterable[int] | None = None,
    n_max: int | None = None,
    seed: int = 0,
) -> VerifyReport:
    """Run a named preset.

    Raises:
        ValueError: If the preset is unknown or ``n_max`` is too small.
    """
    if preset not in PRESETS:
        known = sorted(PRESETS)
        raise ValueError(f"unknown preset {preset!r}, expected one of {known}")
    if n_max is not None and n_max < max(only_i or (3,)) + 2:
        raise ValueError(f"n_max must be ≥ i + 2, got {n_max}")
    return Verifier(PRESETS[preset], only_i=only_i, n_max=n_max, seed=seed).run()


__all__ = ["ALL_CRITERIA", "PRESETS", "Preset", "Verifier", "run_verify"]
