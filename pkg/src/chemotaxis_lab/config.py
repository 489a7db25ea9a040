"""TOML run configuration with strict key validation.

Unknown keys are hard errors: a silently ignored typo in an exponent name
would invalidate an experiment.  Model values may be written as strings
like "81/50", which are parsed into exact Fractions and keep the regime
arithmetic rational.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, InvalidParameter
from .regimes import (
    ModelParams,
    PowerLawProduction,
    ProductionLaw,
    TabulatedProduction,
    validate_params,
)
from .scenarios import ExperimentConfig
from .solver import StepperConfig

#: section -> allowed keys
SCHEMA = {
    "model": {"n", "m1", "m2", "m3", "chi", "xi", "lambda", "mu", "k",
              "alpha", "beta", "k1", "k2", "k3", "R"},
    "production": {"kind", "s", "f1", "f2"},
    "grid": {"N"},
    "solver": {"dt_init", "dt_min", "dt_max", "cfl_safety", "blowup_threshold",
               "t_end", "scheme", "drift_order", "backend", "max_steps"},
    "initial": {"profile", "height", "width", "M0", "r_star", "eps0", "snapshot"},
    "functionals": {"p_list", "p_energy", "s0", "moment_gamma", "s_star",
                    "eps0", "track_moments"},
    "bounds": {"source", "A", "B", "C", "gamma", "delta", "phi0", "p",
               "series", "phi_column"},
    "scenario": {"N", "M0", "M0_factor", "t_end", "blowup_threshold",
                 "capacity_fraction", "dt_init", "dt_min", "dt_max",
                 "cfl_safety", "profile", "core_fraction", "c30_c31_ratio",
                 "growth_factor_min", "moment_gamma", "gamma_offset",
                 "condint_margin", "sample_growth", "height_cap"},
    "output": {"dir", "cadence", "formats", "log_scale", "sample_growth"},
    "sweep": {"parameter", "values", "command", "workers"},
}

MODEL_DEFAULTS = {"k1": 1.0, "k2": 1.0, "k3": 1.0, "R": 1.0}
MODEL_REQUIRED = ("n", "m1", "m2", "m3", "chi", "xi", "lambda", "mu", "k",
                  "alpha", "beta")


@dataclass
class RunConfig:
    raw: dict
    params: ModelParams
    production: ProductionLaw
    grid_N: int = 512
    stepper: StepperConfig = field(default_factory=StepperConfig)
    backend: str = "auto"
    initial: dict = field(default_factory=dict)
    functionals: dict = field(default_factory=dict)
    bounds: Optional[dict] = None
    scenario: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: dict = field(default_factory=dict)
    sweep: Optional[dict] = None


def _coerce_number(value: Any, where: str):
    """Numbers pass through; strings like '81/50' become exact Fractions."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: cannot parse {value!r} as a rational") from exc
    raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")


def _check_schema(data: dict) -> None:
    unknown = []
    for section, content in data.items():
        if section not in SCHEMA:
            unknown.append(section)
            continue
        if not isinstance(content, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key in content:
            if key not in SCHEMA[section]:
                unknown.append(f"{section}.{key}")
    if unknown:
        raise ConfigError("unknown configuration keys: " + ", ".join(sorted(unknown)))


def parse_config_dict(data: dict, base_dir: Optional[Path] = None) -> RunConfig:
    _check_schema(data)
    if "model" not in data:
        raise ConfigError("missing required [model] section")
    model = dict(data["model"])
    missing = [key for key in MODEL_REQUIRED if key not in model]
    if missing:
        raise ConfigError("missing model keys: " + ", ".join(missing))
    values = {}
    for key in MODEL_REQUIRED + tuple(MODEL_DEFAULTS):
        raw = model.get(key, MODEL_DEFAULTS.get(key))
        coerced = _coerce_number(raw, f"model.{key}")
        values["lam" if key == "lambda" else key] = coerced
    n = values["n"]
    if isinstance(n, Fraction):
        if n.denominator != 1:
            raise ConfigError("model.n must be an integer")
        n = int(n)
    if not isinstance(n, int):
        raise ConfigError("model.n must be an integer")
    values["n"] = n
    try:
        params = validate_params(ModelParams(**values))
    except InvalidParameter as exc:
        raise ConfigError(f"invalid [model] section: {exc}") from exc

    prod_cfg = data.get("production", {})
    kind = prod_cfg.get("kind", "power_law_exact")
    if kind == "power_law_exact":
        production: ProductionLaw = PowerLawProduction(params)
    elif kind == "custom_tabulated":
        for key in ("s", "f1", "f2"):
            if key not in prod_cfg:
                raise ConfigError(f"production.{key} required for custom_tabulated")
        production = TabulatedProduction(prod_cfg["s"], prod_cfg["f1"], prod_cfg["f2"])
    else:
        raise ConfigError(f"unknown production.kind {kind!r}")

    grid_N = int(data.get("grid", {}).get("N", 512))

    solver_cfg = dict(data.get("solver", {}))
    backend = solver_cfg.pop("backend", "auto")
    if backend not in ("auto", "full", "reduced"):
        raise ConfigError(f"solver.backend must be auto/full/reduced, got {backend!r}")
    stepper = StepperConfig(**{k: v for k, v in solver_cfg.items()})

    scenario_cfg = dict(data.get("scenario", {}))
    scenario_cfg.setdefault("N", grid_N if "grid" in data else 2048)
    scenario = ExperimentConfig(**scenario_cfg)

    bounds = dict(data["bounds"]) if "bounds" in data else None
    if bounds is not None and base_dir is not None and "series" in bounds:
        series = Path(bounds["series"])
        if not series.is_absolute():
            bounds["series"] = str(base_dir / series)

    initial = dict(data.get("initial", {}))
    if base_dir is not None and "snapshot" in initial:
        snap = Path(initial["snapshot"])
        if not snap.is_absolute():
            initial["snapshot"] = str(base_dir / snap)

    output = {"cadence": 0.01, "formats": ["csv", "svg"], "log_scale": True,
              "sample_growth": 1.05}
    output.update(data.get("output", {}))
    if not output["cadence"] > 0:
        raise ConfigError("output.cadence must be positive")

    sweep = dict(data["sweep"]) if "sweep" in data else None
    if sweep is not None:
        for key in ("parameter", "values"):
            if key not in sweep:
                raise ConfigError(f"sweep.{key} is required")
        sweep.setdefault("command", "simulate")
        sweep.setdefault("workers", 2)
        if sweep["command"] not in ("simulate", "blowup"):
            raise ConfigError("sweep.command must be simulate or blowup")

    return RunConfig(raw=data, params=params, production=production,
                     grid_N=grid_N, stepper=stepper, backend=backend,
                     initial=initial, functionals=dict(data.get("functionals", {})),
                     bounds=bounds, scenario=scenario, output=output, sweep=sweep)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc
    return parse_config_dict(data, base_dir=path.parent)
