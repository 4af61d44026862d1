"""Experiment runner: config parsing, task orchestration, report emission.

One invocation runs one task against a JSON config (plus flag overrides) and
writes a manifest, a JSON report and optional CSV / binary artifacts into the
output directory. Configs are schema-checked before any computation; unknown
keys are rejected. Exit codes: 0 success, 1 task failure (or any failed check
under --strict), 2 invalid config.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    approx_identity_trace,
    critical_threshold_scan,
    fit_decay,
    kernel_decay_fit,
)
from .errors import ConfigInvalid, FracstableError, InsufficientPoints, TaskFailed
from .grids import Grid
from .kernels import KernelField, ModelParams, g_alpha, lp_norm, y_field, z_field
from .mittag_leffler import get_evaluator
from .solver import mass_balance, picard_solve, positivity_check, validate_params
from .stochastic import empirical_vs_z, sample_process
from .symbol import Symbol, build_measure

TASKS = ("ml-eval", "kernel-eval", "solve", "simulate", "verify", "fit-decay", "scan-critical")

_TOP_KEYS = {"task", "seed", "out"}
_BLOCK_KEYS = {
    "params": {"alpha", "beta", "gamma", "lambda", "dimension"},
    "measure": {"dimension", "atoms", "density", "mesh_size"},
    "grid": {"dimension", "extent", "n"},
    "mesh": {"M", "rho"},
}
_TASK_KEYS = {
    "ml-eval": {"alpha", "delta", "x_min", "x_max", "count", "arguments"},
    "kernel-eval": {"params", "measure", "grid", "kind", "t", "p_list"},
    "solve": {"params", "measure", "grid", "mesh", "T", "tol", "max_iter",
              "gate_override", "p", "p_prime"},
    "simulate": {"params", "measure", "grid", "t", "n"},
    "verify": {"suite", "params", "measure", "grid"},
    "fit-decay": {"params", "measure", "grid", "kind", "p", "times",
                  "slope_tol", "weak", "p_prime"},
    "scan-critical": {"params", "measure", "kind", "p_list", "levels", "extent", "t"},
}

_DEFAULT_PARAMS = {"alpha": 0.5, "beta": 1.5, "gamma": 2.0, "lambda": -1.0, "dimension": 1}
_DEFAULT_MEASURE = {"dimension": 1, "atoms": [[1.0, 0.5], [-1.0, 0.5]]}
_DEFAULT_GRID = {"dimension": 1, "extent": 100.0, "n": 1024}


# ------------------------------------------------------------------- config

def load_config(path: str | None, task: str) -> dict:
    """Read and schema-check a JSON config for the given task."""
    if path is None:
        cfg = {}
    else:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config root must be a JSON object")
    allowed = _TASK_KEYS[task] | _TOP_KEYS
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigInvalid(f"unknown config keys for task {task}: {sorted(unknown)}")
    if cfg.get("task", task) != task:
        raise ConfigInvalid(f"config declares task {cfg['task']!r}, invoked as {task!r}")
    for block, keys in _BLOCK_KEYS.items():
        if block in cfg:
            if not isinstance(cfg[block], dict):
                raise ConfigInvalid(f"config block {block!r} must be an object")
            bad = set(cfg[block]) - keys
            if bad:
                raise ConfigInvalid(f"unknown keys in {block!r} block: {sorted(bad)}")
    return cfg


def _model(cfg: dict) -> tuple[ModelParams, Symbol]:
    raw = {**_DEFAULT_PARAMS, **cfg.get("params", {})}
    try:
        params = ModelParams(raw["alpha"], raw["beta"], raw["gamma"],
                             raw["lambda"], raw["dimension"])
        spec = cfg.get("measure") or _default_measure(params.dimension)
        measure = build_measure({"dimension": params.dimension, **spec})
        symbol = Symbol(measure, params.beta)
    except FracstableError as exc:
        raise ConfigInvalid(str(exc)) from exc
    if measure.dimension != params.dimension:
        raise ConfigInvalid("measure and params dimensions disagree")
    return params, symbol


def _default_measure(dimension: int) -> dict:
    if dimension == 1:
        return dict(_DEFAULT_MEASURE)
    return {"dimension": dimension, "density": "uniform"}


def _grid(cfg: dict, dimension: int, defaults: dict | None = None) -> Grid:
    raw = {**(defaults or _DEFAULT_GRID), "dimension": dimension, **cfg.get("grid", {})}
    try:
        return Grid(raw["dimension"], float(raw["extent"]), int(raw["n"]))
    except (FracstableError, ValueError) as exc:
        raise ConfigInvalid(str(exc)) from exc


# ------------------------------------------------------------------- output

def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, config: dict, seed: int, timings: dict, artifacts):
    """Manifest with config echo, versions, seeds and artifact checksums.

    Checksums exclude the manifest itself and any timestamps, so identical
    config + seed reproduce identical checksum blocks.
    """
    manifest = {
        "config": config,
        "versions": {
            "fracstable": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "seed": seed,
        "checksums": {name: _sha256(out / name) for name in sorted(artifacts)},
        "timings_seconds": timings,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    _write_json(out / "manifest.json", manifest)


# -------------------------------------------------------------------- tasks

def _task_ml_eval(cfg, grid_unused, out, args):
    alpha = float(cfg.get("alpha", 0.5))
    delta = float(cfg.get("delta", 1.0))
    if "arguments" in cfg:
        xs = np.asarray(cfg["arguments"], dtype=float)
    else:
        xs = np.geomspace(float(cfg.get("x_min", 1e-6)), float(cfg.get("x_max", 1e4)),
                          int(cfg.get("count", 200)))
    ev = get_evaluator(alpha, delta)
    rows = [(float(x),) + ev.evaluate_with_regime(float(x)) for x in xs]
    report = {
        "task": "ml-eval", "alpha": alpha, "delta": delta,
        "values": [{"x": x, "value": v, "regime": r} for x, v, r in rows],
    }
    if args.emit_csv:
        _write_csv(out / "ml-eval.csv", ["x", "value", "regime"], rows)
    return report, ["ml-eval.csv"] if args.emit_csv else []


def _task_kernel_eval(cfg, out, args):
    params, symbol = _model(cfg)
    grid = _grid(cfg, params.dimension)
    kind = cfg.get("kind", "Z")
    t = float(cfg.get("t", 1.0))
    builder = {"Z": z_field, "Y": y_field}[kind]
    field = builder(params, symbol, grid, t, check_tail=False)
    np.save(out / "field.npy", field.values)
    norms = {str(p): lp_norm(field, float(p) if p != "inf" else math.inf)
             for p in cfg.get("p_list", [1, 2])}
    report = {
        "task": "kernel-eval", "kind": kind, "t": t,
        "mass": field.mass, "aliasing": field.aliasing,
        "tail_estimate": field.tail_estimate, "norms": norms,
        "field_file": "field.npy",
    }
    return report, ["field.npy"]


def _task_solve(cfg, out, args, seed):
    params, symbol = _model(cfg)
    grid = _grid(cfg, params.dimension)
    rng = np.random.Generator(np.random.Philox(key=seed))
    del rng  # solve is deterministic; seed recorded for manifest parity only
    x = grid.mesh()
    u0 = np.exp(-sum(c**2 for c in x))
    mesh = cfg.get("mesh", {})
    traj = picard_solve(
        u0, params, symbol, grid, float(cfg.get("T", 1.0)),
        p=float(cfg.get("p", 2.0)), M=int(mesh.get("M", 128)),
        rho=mesh.get("rho"), tol=float(cfg.get("tol", 1e-8)),
        max_iter=int(cfg.get("max_iter", 25)),
        gate_override=bool(cfg.get("gate_override", False)),
        p_prime=cfg.get("p_prime"),
    )
    np.save(out / "fields.npy", np.stack(traj.fields))
    hv = grid.cell_volume
    rows = [(t, float(f.sum() * hv), float(f.min()),
             float((np.abs(f) ** traj.p).sum() * hv) ** (1.0 / traj.p))
            for t, f in zip(traj.times, traj.fields)]
    _write_csv(out / "diagnostics.csv", ["t", "mass", "min", f"l{traj.p:g}_norm"], rows)
    report = {
        "task": "solve", "converged": traj.converged, "q": traj.q,
        "residuals": traj.residuals, "times": traj.times,
        "mass_balance_defect": mass_balance(traj),
        "min_value": positivity_check(traj),
        "gate": {
            "satisfied_local": traj.gate.satisfied_local,
            "satisfied_global_small": traj.gate.satisfied_global_small,
            "satisfied_global_positive": traj.gate.satisfied_global_positive,
            "violated": list(traj.gate.violated_conditions),
            "overridden": traj.gate_overridden,
        },
        "fields_file": "fields.npy",
    }
    return report, ["fields.npy", "diagnostics.csv"]


def _task_simulate(cfg, out, args, seed):
    params, symbol = _model(cfg)
    # samples are heavy-tailed, so the validation grid must reach far out
    wide = {"extent": 4000.0, "n": 1 << 19} if params.dimension == 1 else {"extent": 400.0, "n": 1 << 10}
    grid = _grid(cfg, params.dimension, defaults=wide)
    t = float(cfg.get("t", 1.0))
    n = int(cfg.get("n", 100000))
    ensemble = sample_process(params, symbol.measure, t, n, seed)
    stat = empirical_vs_z(params, symbol, grid, t, n, seed, ensemble=ensemble)
    threshold = 1.36 / math.sqrt(n)
    artifacts = []
    if args.emit_csv:
        _write_csv(out / "samples.csv",
                   [f"x{i}" for i in range(params.dimension)],
                   ensemble.samples.tolist())
        artifacts.append("samples.csv")
    report = {
        "task": "simulate", "t": t, "n": n, "seed": seed,
        "statistic": stat,
        "statistic_kind": "ks" if params.dimension == 1 else "l1",
        "threshold_5pct": threshold if params.dimension == 1 else None,
        "passed": bool(stat <= 1.5 * threshold) if params.dimension == 1 else None,
        "tolerance": "KS <= 1.5 * 1.36/sqrt(n), slack for the numeric CDF",
        "checks": "time-changed sample law against the synthesized kernel density",
    }
    return report, artifacts


def _mass_checks(params, symbol, grid):
    checks = []
    for t in (0.25, 1.0):
        zf = z_field(params, symbol, grid, t, check_tail=False)
        checks.append({
            "name": f"z-mass-t{t:g}", "value": zf.mass, "target": 1.0,
            "tolerance": 1e-6, "checks": "initial-data kernel has unit mass",
            "passed": bool(abs(zf.mass - 1.0) <= 1e-6),
        })
        yf = y_field(params, symbol, grid, t, check_tail=False)
        target = float(g_alpha(params.alpha, t))
        checks.append({
            "name": f"y-mass-t{t:g}", "value": yf.mass, "target": target,
            "tolerance": 1e-6,
            "checks": "forcing kernel mass equals t^(alpha-1)/Gamma(alpha)",
            "passed": bool(abs(yf.mass - target) <= 1e-6 * max(1.0, target)),
        })
    return checks


def _scaling_checks(params, symbol, grid):
    from .kernels import check_scaling
    checks = []
    for kind in ("Z", "Y"):
        dev = check_scaling(params, symbol, grid, 4.0, kind)
        checks.append({
            "name": f"{kind.lower()}-self-similarity", "value": dev, "target": 0.0,
            "tolerance": 1e-8, "checks": "kernel equals its exact rescaling",
            "passed": bool(dev <= 1e-8),
        })
    return checks


def _identity_checks(params, symbol, grid):
    x = grid.mesh()
    v = np.exp(-sum(c**2 for c in x))
    checks = []
    for kind in ("Z", "Y"):
        errs = approx_identity_trace(params, symbol, grid, v, [1.0, 0.1, 0.01, 0.001], kind)
        ok = bool(np.all(np.diff(errs) < 0))
        checks.append({
            "name": f"{kind.lower()}-approximate-identity",
            "value": errs, "target": "strictly decreasing", "tolerance": 0.0,
            "checks": "mass-normalized kernel converges to the identity as t -> 0",
            "passed": ok,
        })
    return checks


def _task_verify(cfg, out, args):
    params, symbol = _model(cfg)
    grid = _grid(cfg, params.dimension)
    suite = cfg.get("suite", "all")
    if suite not in ("mass", "scaling", "identity", "all"):
        raise ConfigInvalid(f"unknown verify suite {suite!r}")
    checks = []
    if suite in ("mass", "all"):
        checks += _mass_checks(params, symbol, grid)
    if suite in ("scaling", "all"):
        checks += _scaling_checks(params, symbol, grid)
    if suite in ("identity", "all"):
        checks += _identity_checks(params, symbol, grid)
    report = {
        "task": "verify", "suite": suite, "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    return report, []


def _task_fit_decay(cfg, out, args):
    params, symbol = _model(cfg)
    grid = _grid(cfg, params.dimension)
    kind = cfg.get("kind", "Z")
    p = math.inf if cfg.get("p") == "inf" else float(cfg.get("p", 1.0))
    times = np.asarray(cfg.get("times", np.geomspace(1, 64, 7).tolist()), dtype=float)
    fit = kernel_decay_fit(params, symbol, kind, p, times, grid,
                           slope_tol=float(cfg.get("slope_tol", 0.02)),
                           weak=bool(cfg.get("weak", False)))
    artifacts = []
    if args.emit_csv:
        _write_csv(out / "decay-trace.csv", ["t", "norm"],
                   list(zip(fit.times.tolist(), fit.norms.tolist())))
        artifacts.append("decay-trace.csv")
    report = {
        "task": "fit-decay", "kind": kind, "p": p,
        "fitted_slope": fit.fitted_slope, "theoretical_slope": fit.theoretical_slope,
        "r_squared": fit.r_squared, "tolerance": fit.slope_tol, "passed": fit.passed,
        "checks": "norm decay exponent matches the self-similar prediction",
    }
    return report, artifacts


def _task_scan_critical(cfg, out, args):
    params, symbol = _model(cfg)
    kind = cfg.get("kind", "Z")
    p_list = [float(p) for p in cfg.get("p_list", [2.0, 3.5, 4.0, 5.0])]
    levels = [int(n) for n in cfg.get("levels", [64, 256, 1024, 4096])]
    scan = critical_threshold_scan(kind, params, symbol, p_list, levels,
                                   extent=float(cfg.get("extent", 30.0)),
                                   t=float(cfg.get("t", 1.0)))
    report = {
        "task": "scan-critical", "kind": kind, "p_list": p_list, "levels": levels,
        "critical_p": scan.critical_p, "norms": scan.norms, "changes": scan.changes,
        "stabilized": list(scan.stabilized), "diverged": list(scan.diverged),
        "divergence_threshold": scan.divergence_threshold,
        "checks": "discrete norms settle below the critical exponent and grow past it",
        "passed": all(s == (p < scan.critical_p)
                      for s, p in zip(scan.stabilized, p_list)),
    }
    return report, []


# --------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracstable",
        description="Kernels, solver and validation experiments for the "
                    "fractional-in-time stable-in-space diffusion model.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", default="fracstable-out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="RNG seed")
    common.add_argument("--threads", type=int, default=None, help="thread budget")
    common.add_argument("--strict", action="store_true",
                        help="nonzero exit when any reported check fails")
    common.add_argument("--emit-csv", action="store_true", dest="emit_csv",
                        help="dump raw traces/samples as CSV")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, parents=[common])
        if task == "verify":
            p.add_argument("--suite", default=None)
        if task == "simulate":
            p.add_argument("--alpha", type=float, default=None)
            p.add_argument("--beta", type=float, default=None)
            p.add_argument("--t", type=float, default=None)
            p.add_argument("--n", type=int, default=None)
            p.add_argument("--measure", default=None, help="JSON measure file")
    return parser


def _apply_overrides(cfg: dict, args) -> dict:
    if args.task == "verify" and args.suite is not None:
        cfg["suite"] = args.suite
    if args.task == "simulate":
        params = dict(cfg.get("params", {}))
        if args.alpha is not None:
            params["alpha"] = args.alpha
        if args.beta is not None:
            params["beta"] = args.beta
        if params:
            cfg["params"] = params
        if args.t is not None:
            cfg["t"] = args.t
        if args.n is not None:
            cfg["n"] = args.n
        if args.measure is not None:
            with open(args.measure) as fh:
                cfg["measure"] = json.load(fh)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.task)
        cfg = _apply_overrides(cfg, args)
    except (ConfigInvalid, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    env_threads = os.environ.get("FRACSTABLE_THREADS")
    threads = args.threads or (int(env_threads) if env_threads else None)
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", str(threads))
    env_seed = os.environ.get("FRACSTABLE_SEED")
    seed = args.seed if args.seed is not None else cfg.get(
        "seed", int(env_seed) if env_seed else 0)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        if args.task == "ml-eval":
            report, artifacts = _task_ml_eval(cfg, None, out, args)
        elif args.task == "kernel-eval":
            report, artifacts = _task_kernel_eval(cfg, out, args)
        elif args.task == "solve":
            report, artifacts = _task_solve(cfg, out, args, seed)
        elif args.task == "simulate":
            report, artifacts = _task_simulate(cfg, out, args, seed)
        elif args.task == "verify":
            report, artifacts = _task_verify(cfg, out, args)
        elif args.task == "fit-decay":
            report, artifacts = _task_fit_decay(cfg, out, args)
        else:
            report, artifacts = _task_scan_critical(cfg, out, args)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FracstableError, InsufficientPoints, TaskFailed) as exc:
        print(f"task failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        _write_json(out / "report.json",
                    {"task": args.task, "error": type(exc).__name__, "message": str(exc)})
        return 1

    _write_json(out / "report.json", report)
    artifacts = list(artifacts) + ["report.json"]
    timings = {"total": round(time.perf_counter() - started, 6)}
    write_manifest(out, cfg, seed, timings, artifacts)
    if args.strict and report.get("passed") is False:
        print("strict mode: reported checks failed", file=sys.stderr)
        return 1
    if args.strict:
        checks = report.get("checks")
        if isinstance(checks, list) and not all(c.get("passed", True) for c in checks):
            print("strict mode: reported checks failed", file=sys.stderr)
            return 1
    print(json.dumps(_jsonable(report), sort_keys=True)[:2000])
    return 0


if __name__ == "__main__":
    sys.exit(main())
