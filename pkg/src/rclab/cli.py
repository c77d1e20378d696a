"""Command-line interface.

    rclab simulate  --preset example1 --T 3000 --out results/
    rclab esd       --preset example2
    rclab verify    --preset example1 --scheme implicit
    rclab analyze   --preset n1-closedform
    rclab plot      --csv results/trajectory.csv --kind profile --out-svg p.svg

Every data-producing subcommand writes report.json (plus CSVs and SVGs for
simulate/verify) into --out, $RCLAB_OUT, or the working directory. Exit
status is 0 only when all requested verdicts pass; 1 on verdict failure;
2 on operational errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import csvio, svgplot
from .errors import NewtonFailed, NotApplicable, RclabError, UndefinedEntropy
from .esd import brute_force_esd, solve_esd, verify_esd
from .integrator import Scheme, StepConfig, entropy_trace, simulate
from .model import State, validate_params
from .report import RunReport
from .scenarios import ScenarioSpec, build_params, builtin_presets, load_scenario, trait_grid
from .steady import (
    dirac_steady_state,
    extinction_predicate,
    persistence_sum,
    positive_steady_state_excluded,
    two_peak_steady_state,
)

_ESD_SOLVER_TOL = 1e-10
_ESD_SOLVER_MAXIT = 100000


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("RCLAB_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_spec(args) -> tuple[str, ScenarioSpec]:
    if args.preset:
        presets = builtin_presets()
        if args.preset not in presets:
            raise RclabError(
                f"unknown preset '{args.preset}' (have: {', '.join(sorted(presets))})"
            )
        name, spec = args.preset, presets[args.preset]
    else:
        spec = load_scenario(args.scenario)
        name = Path(args.scenario).stem
    if getattr(args, "T", None) is not None:
        spec = replace(spec, T_final=args.T)
    if getattr(args, "dt", None) is not None:
        spec = replace(spec, dt=args.dt)
    if getattr(args, "scheme", None):
        spec = replace(spec, scheme=args.scheme)
    return name, spec


def _step_config(spec: ScenarioSpec) -> StepConfig:
    scheme = Scheme.FULLY_IMPLICIT if spec.scheme == "implicit" else Scheme.SEMI_IMPLICIT
    return StepConfig(
        dt=spec.dt, scheme=scheme, fp_tol=spec.fp_tol, fp_maxit=spec.fp_maxit,
        enforce_mu0=spec.enforce_mu0,
    )


def _trajectory_summary(traj) -> dict[str, float]:
    summary = {
        "steps": len(traj.times) - 1,
        "final_mass": traj.diagnostics[-1].mass,
        "final_F": traj.diagnostics[-1].F,
    }
    if traj.diagnostics[-1].S is not None:
        summary["final_S"] = traj.diagnostics[-1].S
    return summary


def _esd_summary(esd) -> dict[str, float]:
    return {
        "kkt_residual": esd.kkt_residual,
        "persistence_count": len(esd.persistence_set),
        "H_at_min": esd.H_at_min,
        "iterations": esd.iterations,
        "k_nonsingular": esd.k_nonsingular,
    }


def cmd_simulate(args) -> int:
    name, spec = _load_spec(args)
    out = _out_dir(args)
    params, state0 = build_params(spec)
    constants = validate_params(params, state0)
    traj = simulate(params, state0, spec.T_final, _step_config(spec))

    fmat = traj.f_matrix()
    rmat = traj.R_matrix()
    masses = np.array([d.mass for d in traj.diagnostics])
    report = RunReport(
        scenario_name=name,
        constants=constants,
        trajectory_summary=_trajectory_summary(traj),
        verdicts={
            "positivity": bool(np.all(fmat >= 0) and np.all(rmat > 0)),
            "mass_bound": bool(np.all(masses <= constants.M_tilde + 1e-9)),
        },
    )
    (out / "trajectory.csv").write_text(csvio.trajectory_csv(traj), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    _print_verdicts(report)
    return 0 if report.all_passed() else 1


def cmd_esd(args) -> int:
    name, spec = _load_spec(args)
    out = _out_dir(args)
    params, state0 = build_params(spec)
    constants = validate_params(params, state0)
    esd = solve_esd(params, tol=args.solver_tol, maxit=_ESD_SOLVER_MAXIT)
    check = verify_esd(params, esd.f_tilde, esd.R_tilde, tol=10 * args.solver_tol)
    rng = np.random.default_rng(args.seed)
    restart = solve_esd(
        params, f_init=rng.uniform(0.0, 2.0 / params.h, params.N),
        tol=args.solver_tol, maxit=_ESD_SOLVER_MAXIT,
    )
    verdicts = {
        "esd_converged": esd.converged,
        "esd_certified": check.is_esd,
        "persistence_sum": persistence_sum(esd, params) >= -1e-8,
        "restart_agreement": bool(
            np.max(np.abs(restart.f_tilde - esd.f_tilde)) <= 1e-6
        ),
    }
    if args.cross_check:
        if params.N > 3:
            raise RclabError("--cross-check needs N <= 3")
        ref = brute_force_esd(params, grid_max=5.0, grid_step=1e-3)
        verdicts["brute_force_agreement"] = bool(
            np.max(np.abs(ref - esd.f_tilde)) <= 1e-3 + 1e-9
        )
    report = RunReport(
        scenario_name=name, constants=constants, esd_summary=_esd_summary(esd),
        verdicts=verdicts,
    )
    (out / "esd.csv").write_text(csvio.esd_csv(trait_grid(spec), esd), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    print(f"kkt residual: {esd.kkt_residual:.3e}")
    print(f"persistence set: {list(esd.persistence_set)}")
    _print_verdicts(report)
    return 0 if report.all_passed() else 1


def cmd_verify(args) -> int:
    name, spec = _load_spec(args)
    out = _out_dir(args)
    params, state0 = build_params(spec)
    constants = validate_params(params, state0)

    esd = solve_esd(params, tol=args.solver_tol, maxit=_ESD_SOLVER_MAXIT)
    reference = State(f=esd.f_tilde, R=esd.R_tilde)
    config = _step_config(spec)
    traj = simulate(params, state0, spec.T_final, config, reference=reference)

    fmat = traj.f_matrix()
    rmat = traj.R_matrix()
    masses = np.array([d.mass for d in traj.diagnostics])

    final = traj.final_state
    # relative to the stable distribution's mass; for an extinction scenario
    # (zero mass) fall back to the initial mass
    f_scale = float(np.sum(np.abs(esd.f_tilde)))
    if f_scale == 0.0:
        f_scale = max(float(np.sum(np.abs(state0.f))), 1e-300)
    l1_f = float(np.sum(np.abs(final.f - esd.f_tilde))) / f_scale
    linf_r = float(np.max(np.abs(final.R - esd.R_tilde)))

    verdicts = {
        "positivity": bool(np.all(fmat >= 0) and np.all(rmat > 0)),
        "mass_bound": bool(np.all(masses <= constants.M_tilde + 1e-9)),
        "esd_convergence": l1_f <= args.tol and linf_r <= args.tol,
        "persistence_sum": persistence_sum(esd, params) >= -1e-8,
    }
    max_violation = 0.0
    try:
        trace = entropy_trace(traj, esd)
    except UndefinedEntropy:
        trace = None  # trajectory extinct where the stable distribution lives
    if trace is not None and config.scheme is Scheme.FULLY_IMPLICIT:
        excess = np.diff(trace.S) - trace.bounds
        max_violation = float(np.max(excess, initial=-np.inf))
        verdicts["entropy_monotone"] = len(trace.flagged_steps) == 0

    report = RunReport(
        scenario_name=name,
        constants=constants,
        trajectory_summary={**_trajectory_summary(traj),
                            "max_entropy_violation": max_violation},
        esd_summary=_esd_summary(esd),
        comparison={"L1_distance_f": l1_f, "Linf_distance_R": linf_r},
        verdicts=verdicts,
    )
    (out / "trajectory.csv").write_text(csvio.trajectory_csv(traj), encoding="utf-8")
    (out / "esd.csv").write_text(csvio.esd_csv(trait_grid(spec), esd), encoding="utf-8")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    table = csvio.read_csv(csvio.trajectory_csv(traj))
    (out / "profile.svg").write_text(svgplot.render_profile(table), encoding="utf-8")
    (out / "entropy.svg").write_text(svgplot.render_entropy(table), encoding="utf-8")
    _print_verdicts(report)
    return 0 if report.all_passed() else 1


def cmd_analyze(args) -> int:
    name, spec = _load_spec(args)
    out = _out_dir(args)
    params, _state0 = build_params(spec)

    predicate = extinction_predicate(params)
    excluded = positive_steady_state_excluded(params)
    print(f"persistence outlook: {predicate.value}")
    print(f"positive steady state excluded: {excluded}")

    analysis: dict[str, object] = {
        "extinction_predicate": predicate.value,
        "positive_steady_state_excluded": excluded,
    }
    growing = [int(j) for j in np.flatnonzero(params.a > 0)]
    dirac_ok = 0
    for j in growing:
        ds = dirac_steady_state(params, j)
        analysis[f"dirac_rho_{j}"] = ds.rho_bar
        dirac_ok += 1
        print(f"single-peak steady state at trait {j}: rho = {ds.rho_bar:.6g}")
    analysis["dirac_count"] = dirac_ok
    if not growing:
        print("no traits with positive growth: no single-peak steady states")

    if len(growing) >= 2:
        top = sorted(growing, key=lambda j: params.a[j], reverse=True)[:2]
        i, l = top
        try:
            tp = two_peak_steady_state(params, i, l)
        except (NotApplicable, NewtonFailed) as err:
            analysis["two_peak"] = f"failed: {err}"
            print(f"two-peak attempt ({i}, {l}): failed: {err}")
        else:
            if tp is None:
                analysis["two_peak"] = "absent (crossing condition fails)"
                print(f"two-peak attempt ({i}, {l}): absent (crossing condition fails)")
            else:
                analysis["two_peak"] = f"rho1 = {tp.rho1!r}, rho2 = {tp.rho2!r}"
                print(f"two-peak steady state ({i}, {l}): "
                      f"rho1 = {tp.rho1:.6g}, rho2 = {tp.rho2:.6g}")

    report = RunReport(scenario_name=name, analysis=analysis,
                       verdicts={"analysis_complete": True})
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    return 0


def cmd_plot(args) -> int:
    try:
        text = Path(args.csv).read_text(encoding="utf-8")
    except OSError as err:
        raise RclabError(f"cannot read {args.csv}: {err}") from err
    table = csvio.read_csv(text)
    svg = svgplot.render(table, args.kind, log_scale=args.log)
    Path(args.out_svg).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out_svg}")
    return 0


def _print_verdicts(report: RunReport) -> None:
    for key, ok in report.verdicts.items():
        print(f"{key}: {'pass' if ok else 'FAIL'}")


def _add_scenario_args(p: argparse.ArgumentParser, with_overrides: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="name of a built-in scenario")
    src.add_argument("--scenario", help="path to a scenario file")
    p.add_argument("--out", help="output directory (default: $RCLAB_OUT or .)")
    if with_overrides:
        p.add_argument("--T", type=float, help="override final time")
        p.add_argument("--dt", type=float, help="override time step")
        p.add_argument("--scheme", choices=("semi", "implicit"),
                       help="override time-stepping scheme")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rclab",
        description="resource-competition dynamics: simulate, analyze, verify",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a scenario and dump the trajectory")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("esd", help="compute the stable distribution")
    _add_scenario_args(p)
    p.add_argument("--solver-tol", type=float, default=_ESD_SOLVER_TOL,
                   help="complementarity residual target")
    p.add_argument("--cross-check", action="store_true",
                   help="compare against exhaustive grid search (N <= 3)")
    p.add_argument("--seed", type=int, default=0, help="seed for auxiliary draws")
    p.set_defaults(func=cmd_esd)

    p = sub.add_parser("verify", help="simulate, solve, and check all properties")
    _add_scenario_args(p)
    p.add_argument("--tol", type=float, default=1e-3,
                   help="convergence tolerance for the final-state comparison")
    p.add_argument("--solver-tol", type=float, default=_ESD_SOLVER_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="threshold predicates and special steady states")
    _add_scenario_args(p, with_overrides=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="render a CSV as a static SVG")
    p.add_argument("--csv", required=True, help="trajectory.csv or esd.csv")
    p.add_argument("--kind", required=True, help="profile | entropy | waterfall")
    p.add_argument("--out-svg", required=True, help="output SVG path")
    p.add_argument("--log", action="store_true", help="log scale for entropy plots")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RclabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
