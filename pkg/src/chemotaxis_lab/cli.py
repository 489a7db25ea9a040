"""Command-line interface.

Subcommands:
    classify   parameter regime, assumption verdicts, derived exponents
    bound      blow-up time lower bounds from inline or fitted coefficients
    simulate   time integration with functional tracking
    blowup     full blow-up experiment with trajectory verification
    sweep      parameter sweep running simulate/blowup per value

Every subcommand reads one TOML config (--config) and writes its artifacts
into --out: report.txt (+ report.json), series.csv, plots/*.svg,
snapshots/*.bin, index.csv for sweeps.  Verbosity comes from the
CHEMOTAXIS_LAB_LOG environment variable.
"""

from __future__ import annotations

import argparse
import copy
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import report as report_mod
from .config import RunConfig, load_config, parse_config_dict
from .errors import ChemotaxisLabError, ConfigError, DivergenceError, VerdictFailure
from .functionals import FunctionalObserver, MomentConfig, admissible_gamma_interval
from .grid import RadialGrid
from .regimes import (
    admissible_value,
    check_assumptions,
    compute_exponents,
    compute_pbar_detail,
    compute_pfrak,
)
from .scenarios import (
    InitialDataSpec,
    build_concentrated_u0,
    critical_mass,
    run_blowup_experiment,
)
from .solver import extrapolate_Tmax, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DIVERGENT = 3


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return f"{value} (= {float(value):.12g})"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _setup_logging() -> None:
    level = os.environ.get("CHEMOTAXIS_LAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


# ----------------------------------------------------------------------
# classify
# ----------------------------------------------------------------------

def cmd_classify(config: RunConfig, outdir: Path) -> int:
    params = config.params
    regime = check_assumptions(params)
    lines = ["parameter regime report", "=" * 32, regime.to_text()]
    payload = {"regime": regime.to_dict()}
    if regime.h1.holds:
        pfrak_inf = compute_pfrak(params)
        pfrak_choice = admissible_value(pfrak_inf)
        lines.append(f"critical exponent infimum: {_fmt(pfrak_inf)}")
        payload["pfrak_infimum"] = float(pfrak_inf)
        if regime.lp_theory_applicable:
            pbar_inf, binding = compute_pbar_detail(params, pfrak_choice)
            lines.append(f"working exponent infimum: {_fmt(pbar_inf)}"
                         f"   [binding entry: {binding}]")
            payload["pbar_infimum"] = float(pbar_inf)
            payload["pbar_binding_entry"] = binding
            exps = compute_exponents(params, pfrak_choice,
                                     admissible_value(pbar_inf), verify=False)
            relations_ok = all(ok for ok, _ in exps.relations.values())
            lines.append(f"derived exponents at p = pbar*(1+1e-3): "
                         f"{exps.to_dict()}")
            lines.append(f"all exponent relations hold: {relations_ok}")
            payload["exponents"] = exps.to_dict()
            payload["exponent_relations_ok"] = relations_ok
    if regime.blowup_predicted:
        lines.append("blow-up predicted for suitable concentrated data "
                     f"(any mass above C = {critical_mass(params):.12g})")
    text = "\n".join(lines)
    print(text)
    report_mod.write_text(outdir / "report.txt", text)
    report_mod.write_json(outdir / "report.json", payload)
    return EXIT_OK


# ----------------------------------------------------------------------
# bound
# ----------------------------------------------------------------------

def cmd_bound(config: RunConfig, outdir: Path) -> int:
    if config.bounds is None:
        raise ConfigError("bound subcommand needs a [bounds] section")
    spec = dict(config.bounds)
    source = spec.pop("source", "inline")
    params = config.params
    T_est = None
    if source == "inline":
        required = {"A", "B", "C", "gamma", "delta", "phi0"}
        missing = required - spec.keys()
        if missing:
            raise ConfigError("missing [bounds] keys: " + ", ".join(sorted(missing)))
        coeffs = bounds_mod.OdiCoefficients(
            A=float(spec["A"]), B=float(spec["B"]), C=float(spec["C"]),
            gamma=float(spec["gamma"]), delta=float(spec["delta"]),
            phi0=float(spec["phi0"]), p=float(spec.get("p", 2.0)),
            domain_measure=params.domain_measure)
    elif source == "fit":
        if "series" not in spec:
            raise ConfigError("[bounds] source='fit' needs series = <csv path>")
        times, series = report_mod.read_series_csv(spec["series"])
        column = spec.get("phi_column", "phi_p")
        if column not in series:
            raise ConfigError(f"column {column!r} not in {spec['series']}")
        if "gamma" in spec and "delta" in spec:
            gamma, delta = float(spec["gamma"]), float(spec["delta"])
            p = float(spec.get("p", 2.0))
        else:
            pfrak_choice = admissible_value(compute_pfrak(params))
            pbar_inf, _ = compute_pbar_detail(params, pfrak_choice)
            p = float(spec.get("p", admissible_value(pbar_inf)))
            exps = compute_exponents(params, pfrak_choice, p, verify=False)
            gamma, delta = float(exps.odi_gamma), float(exps.odi_delta)
        coeffs = bounds_mod.fit_odi_coefficients(
            times, series[column], gamma, delta, p, params.domain_measure)
        if "linf" in series:
            try:
                T_est, _, _ = extrapolate_Tmax(times, series["linf"])
            except ChemotaxisLabError as exc:
                logger.info("no sup-norm extrapolation: %s", exc)
    else:
        raise ConfigError(f"unknown [bounds] source {source!r}")

    report = bounds_mod.bound_report(coeffs)
    lines = ["blow-up time lower bounds", "=" * 32,
             f"coefficients: A={coeffs.A:.12g} B={coeffs.B:.12g} C={coeffs.C:.12g}",
             f"exponents: gamma={coeffs.gamma:.12g} delta={coeffs.delta:.12g}",
             f"phi0={coeffs.phi0:.12g}  p={coeffs.p:.12g}",
             f"T_implicit = {report.T_implicit:.12g} "
             f"(quadrature error {report.quadrature_error_estimate:.3g})",
             f"T_explicit = {report.T_explicit:.12g}",
             f"explicit <= implicit: {report.consistent}"]
    payload = report.to_dict()
    payload["coefficients"] = {"A": coeffs.A, "B": coeffs.B, "C": coeffs.C,
                               "gamma": coeffs.gamma, "delta": coeffs.delta,
                               "phi0": coeffs.phi0, "p": coeffs.p}
    if coeffs.fit_report:
        payload["fit_report"] = coeffs.fit_report
        lines.append(f"fit report: {coeffs.fit_report}")
    if T_est is not None:
        flag = report.T_implicit <= T_est
        lines.append(f"extrapolated T_max = {T_est:.12g}; "
                     f"T_implicit <= T_max: {flag}")
        payload["T_max_extrapolated"] = T_est
        payload["implicit_below_extrapolated"] = flag
    text = "\n".join(lines)
    print(text)
    report_mod.write_text(outdir / "report.txt", text)
    report_mod.write_json(outdir / "report.json", payload)
    return EXIT_OK


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def _build_initial(config: RunConfig, grid: RadialGrid) -> np.ndarray:
    spec = config.initial
    profile = spec.get("profile", "gaussian")
    if "snapshot" in spec:
        snap = report_mod.read_snapshot(spec["snapshot"])
        if snap["N"] != grid.N or snap["n"] != grid.n:
            raise ConfigError("snapshot geometry does not match the grid")
        return snap["u"]
    height = float(spec.get("height", 1.0))
    width = float(spec.get("width", 0.2 * grid.R))
    if profile == "constant":
        return np.full(grid.N, height)
    if profile == "gaussian":
        return height * np.exp(-0.5 * (grid.r_centers / width) ** 2)
    if profile == "plateau":
        M0 = float(spec.get("M0", height * grid.domain_measure))
        r_star = float(spec.get("r_star", 0.25 * grid.R))
        eps0 = float(spec.get("eps0", 0.05 * M0))
        data = InitialDataSpec(M0=M0, r_star=r_star, eps0=eps0)
        return build_concentrated_u0(data, grid)
    raise ConfigError(f"unknown initial.profile {profile!r}")


def _make_observer(config: RunConfig, grid: RadialGrid, u0: np.ndarray):
    params = config.params
    fcfg = config.functionals
    p_list = tuple(float(p) for p in fcfg.get("p_list", (1.0, 2.0)))
    p_energy = fcfg.get("p_energy")
    moment_cfg = None
    M = max(grid.integrate(u0), critical_mass(params))
    if fcfg.get("track_moments", False) or "s0" in fcfg:
        s0 = float(fcfg.get("s0", grid.R ** grid.n / 6.0))
        if "moment_gamma" in fcfg:
            gamma = float(fcfg["moment_gamma"])
        else:
            low, high = admissible_gamma_interval(params)
            gamma = low + 0.04 * (high - low)
        moment_cfg = MomentConfig(
            s0=s0, moment_gamma=gamma,
            s_star=float(fcfg.get("s_star", s0 / 2.0)),
            eps0=float(fcfg.get("eps0", s0 / 4.0))).validate(params)
    return FunctionalObserver(params, config.production, p_list=p_list,
                              p_energy=p_energy, moment_cfg=moment_cfg, M=M)


def _run_summary_lines(result) -> list:
    lines = [f"status: {result.status}",
             f"t_final: {result.t_final:.12g}",
             f"steps: {result.steps} (rejected {result.rejected_steps})",
             f"clipped mass: {result.clipped_mass:.3e}",
             f"final sup norm: {result.state.linf():.12g}"]
    if result.declared_time is not None:
        lines.append(f"declared blow-up time: {result.declared_time:.12g}")
    return lines


def _emit_run_outputs(outdir: Path, config: RunConfig, grid: RadialGrid,
                      result, extra_lines=(), write_report: bool = True) -> None:
    report_mod.write_series_csv(outdir / "series.csv", result.times, result.series)
    formats = config.output.get("formats", ["csv", "svg"])
    if "svg" in formats:
        from .plots import render_series_plots
        render_series_plots(outdir / "plots", result.times, result.series,
                            log_scale=bool(config.output.get("log_scale", True)))
    if "bin" in formats:
        snapdir = outdir / "snapshots"
        snapdir.mkdir(parents=True, exist_ok=True)
        report_mod.write_snapshot(snapdir / f"state_{result.t_final:.9g}.bin",
                                  result.state, grid.n, grid.R)
    if write_report:
        lines = _run_summary_lines(result) + list(extra_lines)
        report_mod.write_text(outdir / "report.txt", "\n".join(lines))


def cmd_simulate(config: RunConfig, outdir: Path) -> int:
    params = config.params
    grid = RadialGrid.uniform(params.n, float(params.R), config.grid_N)
    u0 = _build_initial(config, grid)
    observer = _make_observer(config, grid, u0)
    backend = config.backend
    if backend == "auto":
        backend = "reduced" if params.m2 == params.m3 else "full"
    result = run(u0, grid, params, config.production, config.stepper,
                 observers=[observer], mode=backend,
                 sample_dt=float(config.output["cadence"]),
                 sample_growth=float(config.output.get("sample_growth", 1.05)))
    _emit_run_outputs(outdir, config, grid, result,
                      extra_lines=[f"backend: {backend}"])
    print(f"simulate: {result.status} at t={result.t_final:.6g} "
          f"(sup norm {result.state.linf():.6g})")
    return EXIT_OK


# ----------------------------------------------------------------------
# blowup
# ----------------------------------------------------------------------

def cmd_blowup(config: RunConfig, outdir: Path) -> int:
    report = run_blowup_experiment(config.params, config.production,
                                   config.scenario, raise_on_failure=False)
    result = report.run_result
    _emit_run_outputs(outdir, config, report.grid, result, write_report=False)
    text = report.to_text() + "\n\nrun summary:\n" \
        + "\n".join("  " + line for line in _run_summary_lines(result))
    report_mod.write_text(outdir / "report.txt", text)
    report_mod.write_json(outdir / "report.json", report.to_dict())
    print(text)
    return EXIT_OK if report.passed else EXIT_FAILURE


# ----------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------

def _set_nested(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            raise ConfigError(f"sweep.parameter {dotted!r} not found in config")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"sweep.parameter {dotted!r} not found in config")
    node[keys[-1]] = value


def _sweep_worker(payload) -> dict:
    raw, base_dir, run_dir, command, parameter, value = payload
    run_path = Path(run_dir)
    run_path.mkdir(parents=True, exist_ok=True)
    row = {"run": run_path.name, "parameter": parameter, "value": value}
    try:
        cfg = parse_config_dict(raw, base_dir=Path(base_dir))
        if command == "simulate":
            code = cmd_simulate(cfg, run_path)
            times, series = report_mod.read_series_csv(run_path / "series.csv")
            row.update(status="completed", exit_code=code,
                       final_linf=float(series["linf"][-1]),
                       t_final=float(times[-1]))
        else:
            code = cmd_blowup(cfg, run_path)
            import json
            payload = json.loads((run_path / "report.json").read_text())
            row.update(status=payload["run_status"], exit_code=code,
                       T_blowup=payload.get("T_blowup_observed"))
    except ChemotaxisLabError as exc:
        logger.error("sweep run %s failed: %s", run_path.name, exc)
        row.update(status="error", exit_code=EXIT_FAILURE, error=str(exc))
    except Exception as exc:  # noqa: BLE001 - per-run isolation
        logger.exception("sweep run %s crashed", run_path.name)
        row.update(status="crash", exit_code=EXIT_FAILURE, error=str(exc))
    return row


def cmd_sweep(config: RunConfig, outdir: Path, workers: int = None) -> int:
    if config.sweep is None:
        raise ConfigError("sweep subcommand needs a [sweep] section")
    sweep = config.sweep
    parameter = sweep["parameter"]
    values = list(sweep["values"])
    command = sweep["command"]
    n_workers = int(workers if workers is not None else sweep.get("workers", 2))

    jobs = []
    for i, value in enumerate(values):
        raw = copy.deepcopy(config.raw)
        raw.pop("sweep", None)
        _set_nested(raw, parameter, value)
        run_dir = outdir / f"run_{i:03d}"
        jobs.append((raw, str(outdir), str(run_dir), command, parameter, value))

    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(job) for job in jobs]

    columns = sorted({key for row in rows for key in row})
    lead = [c for c in ("run", "parameter", "value", "status", "exit_code") if c in columns]
    columns = lead + [c for c in columns if c not in lead]
    with open(outdir / "index.csv", "w", newline="") as handle:
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(_csv_cell(row.get(c, "")) for c in columns) + "\n")
    worst = max(int(row.get("exit_code", EXIT_FAILURE)) for row in rows)
    print(f"sweep: {len(rows)} runs, worst exit code {worst} "
          f"(index at {outdir / 'index.csv'})")
    return worst


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value).replace(",", ";")


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemotaxis-lab",
        description="numerical laboratory for attraction-repulsion chemotaxis "
                    "systems with logistic damping")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("classify", "evaluate assumptions and derived exponents"),
        ("bound", "compute blow-up time lower bounds"),
        ("simulate", "integrate the system and track functionals"),
        ("blowup", "run a verified blow-up experiment"),
        ("sweep", "run simulate/blowup over a parameter grid"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="TOML configuration file")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--workers", type=int, default=None,
                         help="parallel workers (sweep only)")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command == "classify":
            return cmd_classify(config, outdir)
        if args.command == "bound":
            return cmd_bound(config, outdir)
        if args.command == "simulate":
            return cmd_simulate(config, outdir)
        if args.command == "blowup":
            return cmd_blowup(config, outdir)
        if args.command == "sweep":
            return cmd_sweep(config, outdir, args.workers)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergent bound: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except VerdictFailure as exc:
        print(f"verdict failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ChemotaxisLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
