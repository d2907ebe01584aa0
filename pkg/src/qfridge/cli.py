"""Command-line front end: resolve a config, run one experiment, write data files.

Exit codes
----------
0   success
1   unexpected internal error
2   configuration or usage error
3   output files could not be written
4   ``validate`` found a failing invariant
10  generic library error
11  invalid parameter
12  singular virtual temperature
13  sigma^z expectation outside [-1, 1]
14  invalid density matrix
15  positivity violated during propagation
16  integrator failure
17  steady state not unique or not found
18  no finite-time temperature minimum
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import config as cfg
from .dynamics import Trajectory, find_first_minimum, propagate, steady_state
from .errors import ConfigError, FridgeError, NoMinimumError
from .liouvillians import build_liouvillian, scale_dissipation
from .model import (
    BathModel,
    BathSpec,
    FridgeParams,
    coherence_bound,
    effective_temperature,
    set_tolerances,
    sigma_z_expectations,
)
from .noise import PhaseDistribution, Scenario, analytic_shift, ensemble_evolve
from .protocols import (
    initial_state,
    relaxation_rate_gamma_r,
    run_single_shot,
    sweep_tradeoff,
)
from .validation import run_suite

log = logging.getLogger("qfridge")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_OUTPUT = 3
EXIT_VALIDATION = 4

NOISE_COLUMNS = (
    "parameter",
    "scenario",
    "t_opt",
    "t_opt_prime",
    "t_opt_prime_analytic",
    "delta_sz",
    "delta_sz_analytic",
    "delta_T",
    "delta_T_analytic",
)


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------- formatting


def _fmt(x) -> str:
    return format(float(x), ".17g")


def render_csv(columns: dict[str, np.ndarray], manifest_hash: str) -> str:
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [f"# manifest_hash={manifest_hash}", ",".join(names)]
    lines += [
        ",".join(_fmt(col[k]) for col in data)
        for k in range(len(data[0]) if data else 0)
    ]
    return "\n".join(lines) + "\n"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def render_json(payload: dict) -> str:
    return (
        json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"
    )


# ---------------------------------------------------------------- experiments


def _objects(config: dict) -> tuple[FridgeParams, BathSpec]:
    params = FridgeParams(**config["params"])
    bath = BathSpec(**{**config["bath"], "model": BathModel(config["bath"]["model"])})
    return params, bath


def _minimum_summary(traj: Trajectory) -> dict:
    try:
        t_min, temp_min = find_first_minimum(traj)
    except NoMinimumError:
        return {"t_min": None, "T_min": None}
    return {"t_min": t_min, "T_min": temp_min}


def run_evolve(config: dict) -> tuple[dict, dict]:
    params, bath = _objects(config)
    opts = config["evolve"]
    models = opts["models"] or [bath.model.value]
    tables, summary = {}, {"runs": []}
    c_max = coherence_bound(params)
    for model in models:
        spec = bath.replace(model=BathModel(model))
        liouv = build_liouvillian(params, spec)
        t_inf = steady_state(liouv).t_inf_temperature
        for frac in opts["r_fractions"]:
            rho0 = initial_state(params, spec, frac * c_max, opts["phi"])
            traj = propagate(
                liouv, rho0, opts["t_end"], opts["n_samples"], method=opts["method"]
            )
            name = f"trajectory_{model}_r{frac:g}.csv"
            tables[name] = traj.table()
            summary["runs"].append(
                {
                    "model": model,
                    "r_fraction": frac,
                    "file": name,
                    "T_inf": t_inf,
                    **_minimum_summary(traj),
                }
            )
    summary["pi_over_2g"] = math.pi / (2 * params.g) if params.g > 0 else None
    return tables, summary


def run_steady(config: dict) -> tuple[dict, dict]:
    params, bath = _objects(config)
    ss = steady_state(build_liouvillian(params, bath))
    sz = sigma_z_expectations(ss.rho_inf)
    temps = [
        effective_temperature(float(np.clip(s, -1, 1)), e)
        for s, e in zip(sz, params.energies)
    ]
    summary = {
        "model": bath.model.value,
        "T_inf": ss.t_inf_temperature,
        "residual": ss.residual,
        "sz": list(sz),
        "temperatures": list(temps),
    }
    return {}, summary


def run_single_shot_cmd(config: dict) -> tuple[dict, dict]:
    params, bath = _objects(config)
    opts = config["single_shot"]
    res = run_single_shot(
        params,
        bath,
        opts["t0_policy"],
        t0=opts["t0"],
        r=opts["r_fraction"] * coherence_bound(params),
        phi=opts["phi"],
        time_cap=opts["time_cap"],
        n_pre=opts["n_pre"],
        n_post=opts["n_post"],
    )
    liouv = build_liouvillian(params, bath)
    running = propagate(
        liouv, res.pre_trajectory.states[-1], times=res.post_trajectory.times
    )
    tables = {
        "trajectory_pre.csv": res.pre_trajectory.table(),
        "trajectory_post.csv": res.post_trajectory.table(),
        "trajectory_no_switch.csv": running.table(),
    }
    return tables, res.summary()


def run_sweep(config: dict) -> tuple[dict, dict]:
    params, bath = _objects(config)
    opts = config["sweep"]
    grid = opts["hot_offsets"]
    offsets = np.linspace(grid["start"], grid["stop"], grid["num"])
    curves = sweep_tradeoff(
        params,
        bath,
        offsets,
        opts["t_rooms"],
        r_fraction=opts["r_fraction"],
        phi=opts["phi"],
    )
    rows = [p for t_room in curves for p in curves[t_room]]
    table = {
        "T_h": [p.t_hot for p in rows],
        "T_r": [p.t_room for p in rows],
        "delta_T": [p.delta_T for p in rows],
        "T_inf": [p.T_inf for p in rows],
        "frac_advantage": [p.fractional_advantage for p in rows],
        "t_Q": [p.t_Q for p in rows],
        "gamma_r": [p.gamma_r for p in rows],
        "t_Q_scaled": [p.t_q_scaled for p in rows],
    }
    summary = {"curves": []}
    for t_room, points in curves.items():
        frac = np.array([p.fractional_advantage for p in points])
        best = int(np.nanargmax(frac)) if np.any(np.isfinite(frac)) else None
        summary["curves"].append(
            {
                "T_r": t_room,
                "n_points": len(points),
                "failures": [
                    {"T_h": p.t_hot, "error": p.error} for p in points if p.error
                ],
                "best_T_h": points[best].t_hot if best is not None else None,
                "best_frac_advantage": frac[best] if best is not None else None,
            }
        )
    return {"sweep.csv": table}, summary


def run_noise(config: dict) -> tuple[dict, dict]:
    params, bath = _objects(config)
    opts = config["noise"]
    liouv = build_liouvillian(params, bath)
    if opts["dissipation_scale"] != 1.0:
        liouv = scale_dissipation(liouv, opts["dissipation_scale"])
    r = opts["r_fraction"] * coherence_bound(params)
    gaussian = opts["distribution"] == "gaussian"
    values = opts["variances"] if gaussian else opts["widths"]
    if not values:
        key = "variances" if gaussian else "widths"
        raise ConfigError(
            f"noise.{key} must list at least one value for a {opts['distribution']} distribution"
        )

    rows = {c: [] for c in NOISE_COLUMNS}
    tables: dict[str, dict] = {}
    for value in values:
        dist = (
            PhaseDistribution.gaussian(value)
            if gaussian
            else PhaseDistribution.uniform(value)
        )
        for scenario in Scenario:
            res = ensemble_evolve(
                params,
                bath,
                r,
                dist,
                n_samples=opts["n_samples"],
                seed=config["seed"],
                scenario=scenario,
                t_end=opts["t_end"],
                n_points=opts["n_points"],
                liouvillian=liouv,
            )
            if gaussian:
                t_prime_a, dsz_a, dtemp_a = analytic_shift(params, r, value, scenario)
            else:
                t_prime_a = dsz_a = dtemp_a = math.nan
            for col, x in zip(
                NOISE_COLUMNS[2:],
                (
                    res.t_opt,
                    res.t_opt_prime,
                    t_prime_a,
                    res.delta_sigma_z,
                    dsz_a,
                    res.delta_T,
                    dtemp_a,
                ),
            ):
                rows[col].append(x)
            rows["parameter"].append(value)
            rows["scenario"].append(0.0 if scenario is Scenario.KNOWN else 1.0)
        tables[f"trajectory_noisy_{value:g}.csv"] = res.mean_trajectory.table()
    tables["trajectory_reference.csv"] = res.reference_trajectory.table()
    tables["noise_shifts.csv"] = rows
    summary = {
        "distribution": opts["distribution"],
        "parameter_name": "variance" if gaussian else "width",
        "scenario_codes": {"known": 0, "unknown": 1},
        "r": r,
        "gamma_r": relaxation_rate_gamma_r(params, bath),
        "t_opt": rows["t_opt"][0],
    }
    return tables, summary


def run_validate(config: dict) -> tuple[dict, dict]:
    checks = run_suite()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    summary = {
        "checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks
        ]
    }
    summary["all_passed"] = all(c.passed for c in checks)
    return {}, summary


RUNNERS = {
    "evolve": run_evolve,
    "steady": run_steady,
    "single-shot": run_single_shot_cmd,
    "sweep": run_sweep,
    "noise-ensemble": run_noise,
    "validate": run_validate,
}


# ---------------------------------------------------------------- driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfridge", description="Three-qubit absorption refrigerator experiments."
    )
    parser.add_argument(
        "--print-schema",
        action="store_true",
        help="print the config JSON schema and exit",
    )
    sub = parser.add_subparsers(dest="command")
    for name in cfg.EXPERIMENTS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", metavar="PATH", help="YAML experiment config")
        src.add_argument(
            "--preset", choices=cfg.PRESET_NAMES, help="shipped figure preset"
        )
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dotted-path override, e.g. params.g=0.1 (repeatable)",
        )
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, help="RNG seed for Monte-Carlo ensembles")
        p.add_argument(
            "--format",
            choices=["csv", "summary"],
            help="csv writes tables and summary; summary only the summary",
        )
        p.add_argument(
            "--log-level", default="WARNING", help="logging level (default WARNING)"
        )
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    if args.preset:
        file_config = cfg.load_preset(args.preset)
    elif args.config:
        file_config = cfg.load_file(args.config)
    else:
        file_config = {}
    declared = file_config.get("experiment")
    if declared is not None and declared != args.command:
        raise ConfigError(
            f"config declares experiment {declared!r} but the {args.command!r} command was run"
        )
    overrides = list(args.overrides) + [f"experiment={args.command}"]
    if args.out is not None:
        overrides.append(f"output.dir={json.dumps(args.out)}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.format is not None:
        overrides.append(f"output.format={args.format}")
    return cfg.resolve(file_config, overrides)


def manifest_hash(config: dict) -> str:
    hashed = copy.deepcopy(config)
    # where files land does not change what they contain
    hashed["output"].pop("dir", None)
    return cfg.config_hash(hashed, version())


def write_outputs(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        tmp = out_dir / f".{name}.tmp"
        tmp.write_text(text)
        os.replace(tmp, out_dir / name)


def error_record(exc: BaseException, code: int, command: str | None) -> dict:
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": code,
        "command": command,
    }


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, FridgeError):
        return exc.exit_code
    if isinstance(exc, OSError):
        return EXIT_OUTPUT
    return EXIT_INTERNAL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_schema:
        print(json.dumps(cfg.SCHEMA, indent=2))
        return EXIT_OK
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s"
    )

    out_dir = Path(args.out) if args.out else None
    try:
        config = resolve_config(args)
        out_dir = Path(config["output"]["dir"])
        set_tolerances(**config["tolerances"])
        digest = manifest_hash(config)
        start = time.perf_counter()
        tables, summary = RUNNERS[args.command](config)
        wall = time.perf_counter() - start

        files: dict[str, str] = {}
        if config["output"]["format"] == "csv":
            files.update(
                {
                    name: render_csv(cols, digest)
                    for name, cols in sorted(tables.items())
                }
            )
        summary = {"manifest_hash": digest, "experiment": args.command, **summary}
        files["summary.json"] = render_json(summary)
        files["manifest.json"] = render_json(
            {
                "manifest_hash": digest,
                "version": version(),
                "config": config,
                "wall_time_s": wall,
                "files": sorted(files),
            }
        )
        write_outputs(out_dir, files)
    except Exception as exc:
        code = _exit_code(exc)
        record = error_record(exc, code, args.command)
        if code == EXIT_INTERNAL:
            log.exception("internal error")
        print(json.dumps(record), file=sys.stderr)
        if out_dir is not None:
            try:
                write_outputs(
                    out_dir, {"error.json": json.dumps(record, indent=2) + "\n"}
                )
            except OSError:
                pass
        return code
    finally:
        set_tolerances(**cfg.DEFAULTS["tolerances"])

    if args.command == "validate" and not summary["all_passed"]:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
