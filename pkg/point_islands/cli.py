"""Command-line entry point: ``point-islands <command> [options]``.

Results go to files under ``--output-dir`` and a one-line summary to stdout;
structured logs go to stderr.
"""

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from prometheus_client import REGISTRY, write_to_textfile
from pydantic import ValidationError

from point_islands.analysis.asymptotics import similarity_snapshot
from point_islands.config import (
    IntegrationConfig,
    OutputFormat,
    RunConfig,
    System,
    Units,
    build_params,
)
from point_islands.core.compartments import decompose, monotonicity_check
from point_islands.core.integrator import (
    IntegrationError,
    Trajectory,
    front_position,
    log_checkpoints,
)
from point_islands.core.model import rhs_closed
from point_islands.core.simulate import (
    auto_n_max,
    simulate_closed,
    simulate_reduced,
    simulate_truncated,
    truncated_states,
    truncation_adequacy,
)
from point_islands.core.verify import PRESETS, run_verify
from point_islands.observability import logging as logs
from point_islands.observability.logging import log
from point_islands.observability.timing import timed
from point_islands.schemas.records import (
    DecompositionRecord,
    ExpansionRecord,
    FlowRecord,
    ParamsRecord,
    TrajectorySummary,
    json_number,
)
from point_islands.series.centre_manifold import PivotError, solve_centre_manifold
from point_islands.series.field import build_field
from point_islands.series.qssa import compare_expansions, qssa_expansion
from point_islands.series.symbolic import InterpolationError, symbolic_reduced_ode
from point_islands.storage.writers import (
    observables_frame,
    snapshot_frame,
    state_columns,
    trajectory_frame,
    write_frame,
    write_json,
)
from point_islands.utils import env, format_rational, to_fraction

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class CheckFailed(RuntimeError):
    """Raised when a command ran but one of its checks did not pass."""


def _suffix(fmt: OutputFormat) -> str:
    return ".csv" if fmt is OutputFormat.CSV else ".json"


def _integration(args: argparse.Namespace) -> IntegrationConfig:
    t_end = args.t_end
    checkpoints: tuple[float, ...] = ()
    if t_end > 0 and args.checkpoints > 1:
        checkpoints = log_checkpoints(min(1.0, t_end / 100), t_end, args.checkpoints)
    return IntegrationConfig(
        rtol=args.rtol, atol=args.atol, t_end=t_end, checkpoints=checkpoints
    )


def _run_config(args: argparse.Namespace) -> RunConfig:
    if args.command in ("simulate", "verify"):
        params = build_params(args.i, args.alpha_tilde, args.beta)
    else:
        # series commands take the scaled rate directly
        params = build_params(args.i, args.alpha or "1", 1)
    integration = (
        _integration(args) if args.command == "simulate" else IntegrationConfig()
    )
    return RunConfig(
        command=args.command,
        params=params,
        integration=integration,
        order=getattr(args, "order", None),
        n_max=getattr(args, "n_max", None),
        system=getattr(args, "system", System.TRUNCATED),
        units=getattr(args, "units", Units.SCALED),
        output_dir=args.output_dir,
        output_format=args.format,
        preset=getattr(args, "preset", "desk"),
        seed=getattr(args, "seed", 0),
    )


def _simulate_run(config: RunConfig) -> tuple[Trajectory, int | None]:
    params, integration = config.params, config.integration
    if config.system is System.TRUNCATED:
        n_max = config.n_max or auto_n_max(params, integration.t_end)
        return simulate_truncated(params, integration, n_max=n_max), n_max
    if config.system is System.REDUCED:
        return simulate_reduced(params, integration), None
    return simulate_closed(params, integration), None


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _run_config(args)
    params, out, fmt = config.params, config.output_dir, config.output_format
    trajectory, n_max = _simulate_run(config)
    suffix = _suffix(fmt)
    frame = trajectory_frame(trajectory, params, config.units)
    write_frame(frame, out / f"trajectory{suffix}", fmt)

    mass_residual = adequate = None
    if config.system is System.TRUNCATED and n_max is not None:
        observed = observables_frame(trajectory, params)
        write_frame(observed, out / f"observables{suffix}", fmt)
        mass_residual = float(observed["mass_residual"].abs().max())
        adequate = truncation_adequacy(trajectory, n_max, params.i).adequate
        if config.integration.t_end > 0:
            state = truncated_states(trajectory)[-1]
            snapshot = similarity_snapshot(params, state)
            write_frame(snapshot_frame(snapshot), out / f"snapshot{suffix}", fmt)

    columns = state_columns(trajectory.system, trajectory.values.shape[1])
    final_row = frame.iloc[-1]
    summary = TrajectorySummary(
        params=ParamsRecord.from_params(params),
        system=config.system.value,
        units=config.units.value,
        n_max=n_max,
        t_end=config.integration.t_end,
        checkpoints=len(trajectory),
        final={name: float(final_row[name]) for name in columns},
        mass_residual=mass_residual,
        front_position=float(front_position(trajectory, params.i)[-1]),
        truncation_adequate=adequate,
        stats=trajectory.stats,
    )
    write_json(summary, out / "summary.json")
    horizon = config.integration.t_end
    print(
        f"simulated {config.system.value} i={params.i} to T={horizon:g}"
        f" in {trajectory.stats.accepted} steps"
    )
    if adequate is False:
        log.warning("truncation_inadequate", n_max=n_max)
    return EXIT_OK


def cmd_expand(args: argparse.Namespace) -> int:
    config = _run_config(args)
    i, alpha = config.params.i, config.params.alpha
    beta = to_fraction(args.beta or "1")
    # without rates the centre-manifold flow is also given in alpha and beta
    symbolic = args.method == "cm" and args.alpha is None and args.beta is None
    order = config.series_order
    if args.method == "qssa":
        if beta != 1:
            raise ValueError("the QSSA expansion is defined in scaled units, beta = 1")
        q = qssa_expansion(i, alpha, order)
        series = {f"g{j}": s for j, s in sorted(q.series.items())}
        series["gw"] = q.g_w_series
        flow = q.reduced_ode
    else:
        expansion = solve_centre_manifold(build_field(i, alpha, beta), order)
        series = expansion.series()
        flow = expansion.reduced_ode
    text = f"c1' ~ {flow.format()}"
    symbols = symbolic_reduced_ode(i, order) if symbolic else None
    record = ExpansionRecord(
        kind=args.method,
        i=i,
        alpha=format_rational(alpha),
        beta=format_rational(beta),
        order=order,
        series={name: s.to_strings() for name, s in series.items()},
        reduced_ode=flow.to_strings(),
        reduced_ode_text=text,
        symbolic=symbols.to_strings() if symbols is not None else None,
    )
    write_json(record, config.output_dir / f"expansion_{args.method}.json")
    print(text)
    if symbols is not None:
        print(f"c1' ~ {symbols.format()}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config = _run_config(args)
    i, alpha, order = config.params.i, config.params.alpha, config.series_order
    cm = solve_centre_manifold(build_field(i, alpha, 1), order)
    report = compare_expansions(cm, qssa_expansion(i, alpha, order))
    write_json(report, config.output_dir / "compare.json")
    print(f"first difference at power {report.first_difference}")
    if not report.leading_terms_agree:
        raise CheckFailed(f"leading terms differ at powers {report.checked_powers}")
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace) -> int:
    config = _run_config(args)
    params = config.params
    state = [to_fraction(v) for v in args.state]
    split = decompose(params.i, params.alpha, state)
    rhs = tuple(rhs_closed(params, state))
    reconstructed = split.reconstruct()
    record = DecompositionRecord(
        i=params.i,
        alpha=format_rational(params.alpha),
        state=[json_number(v) for v in state],
        inputs=[json_number(v) for v in split.inputs],
        flows=[
            FlowRecord(
                source=f.source,
                target=f.target,
                monomial=f.monomial,
                value=json_number(f.value),
            )
            for f in split.flows
        ],
        outflows=[json_number(v) for v in split.outflows()],
        reconstructed=[json_number(v) for v in reconstructed],
        rhs=[json_number(v) for v in rhs],
        identity_holds=reconstructed == rhs,
        monotone=monotonicity_check(params.i).passed,
    )
    write_json(record, config.output_dir / "decompose.json")
    print(" ".join(format_rational(v) for v in reconstructed))
    if not record.identity_holds:
        raise CheckFailed("flows do not reconstruct the right-hand side")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = _run_config(args)
    report = run_verify(
        config.preset, only_i=args.i_values, n_max=config.n_max, seed=config.seed
    )
    write_json(report, config.output_dir / f"verify_{config.preset}.json")
    for result in report.criteria:
        print(f"{'PASS' if result.passed else 'FAIL'} {result.name}")
    if not report.passed:
        raise CheckFailed(f"failed criteria: {', '.join(report.failed)}")
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "simulate": cmd_simulate,
    "expand": cmd_expand,
    "compare": cmd_compare,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--output-dir",
        type=Path,
        default=Path(env("POINT_ISLANDS_OUTPUT_DIR", "out") or "out"),
        help="Directory for output files (env POINT_ISLANDS_OUTPUT_DIR).",
    )
    common.add_argument(
        "--format",
        type=OutputFormat,
        choices=list(OutputFormat),
        default=OutputFormat.CSV,
        help="Tabular output format.",
    )
    common.add_argument(
        "--log-level",
        default=env("POINT_ISLANDS_LOG_LEVEL", "INFO"),
        help="Log level (env POINT_ISLANDS_LOG_LEVEL).",
    )
    common.add_argument(
        "--metrics-file", type=Path, help="Write Prometheus metrics here on exit."
    )

    physical = argparse.ArgumentParser(add_help=False)
    physical.add_argument("--i", type=int, default=2, help="Critical island size.")
    physical.add_argument("--alpha-tilde", default="1", help="Deposition rate.")
    physical.add_argument("--beta", default="1", help="Fragmentation rate.")

    series = argparse.ArgumentParser(add_help=False)
    series.add_argument("--i", type=int, default=2, help="Critical island size.")
    series.add_argument("--alpha", help="Scaled deposition rate (default 1).")
    series.add_argument("--order", type=int, help="Truncation order (default 2i+6).")

    parser = argparse.ArgumentParser(
        prog="point-islands",
        description="Point-island rate equations: simulation and series laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser(
        "simulate", parents=[common, physical], help="Integrate the rate equations."
    )
    simulate.add_argument("--t-end", type=float, default=1e3, help="Scaled horizon.")
    simulate.add_argument(
        "--checkpoints", type=int, default=61, help="Log-spaced output times."
    )
    simulate.add_argument("--n-max", type=int, help="Truncation size.")
    simulate.add_argument("--rtol", type=float, default=1e-8)
    simulate.add_argument("--atol", type=float, default=1e-12)
    simulate.add_argument(
        "--system", type=System, choices=list(System), default=System.TRUNCATED
    )
    simulate.add_argument(
        "--units", type=Units, choices=list(Units), default=Units.SCALED
    )

    expand = sub.add_parser(
        "expand", parents=[common, series], help="Expand the slow manifold."
    )
    expand.add_argument("--beta", help="Fragmentation rate (default 1).")
    expand.add_argument("--method", choices=["cm", "qssa"], default="cm")

    sub.add_parser(
        "compare",
        parents=[common, series],
        help="Compare centre-manifold and QSSA reduced flows.",
    )

    dec = sub.add_parser(
        "decompose", parents=[common, series], help="Split the closed chain into flows."
    )
    dec.add_argument("--state", nargs="+", required=True, help="c_1 .. c_i.")

    verify = sub.add_parser("verify", parents=[common], help="Run acceptance checks.")
    verify.add_argument(
        "--i", dest="i_values", type=int, action="append", help="Simulated i."
    )
    verify.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    verify.add_argument("--n-max", type=int, help="Force the truncation size.")
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(i=2, alpha_tilde="1", beta="1")
    return parser


def _message(exc: ValidationError) -> str:
    first = exc.errors()[0]
    return str(first["msg"]).removeprefix("Value error, ")


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv`` and run one command; returns the exit code."""
    args = build_parser().parse_args(argv)
    logs.setup(args.log_level)
    command = COMMANDS[args.command]
    code = EXIT_OK
    try:
        with timed(args.command):
            code = command(args)
    except ValidationError as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        code = EXIT_USAGE
    except (IntegrationError, PivotError, InterpolationError, CheckFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_FAILED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    finally:
        if args.metrics_file is not None:
            write_to_textfile(str(args.metrics_file), REGISTRY)
    return code


if __name__ == "__main__":
    sys.exit(main())
