"""Command line driver: build a problem, run one method, write artifacts.

A run is described by a small YAML config (or by the ``config`` block of a
previously written ``manifest.json``, which re-executes bit-for-bit)::

    problem: heat_rod            # oscillator | clamped_bar | heat_rod | path.system
    method: setprop_box          # or setprop_zono | setprop_support |
                                 #    backward_euler | newmark | bathe
    delta: 1.0e-5
    horizon: 0.03                # or steps: 3000 (or both, if consistent)
    outputs:
      - theta: 49                # heat dof        -> column theta49
      - gradient: 66             # rod element     -> column grad66
      - u: 139                   # displacement dof (dynamics problems)
      - v: 0                     # velocity dof     (dynamics problems)
      - direction: [1.0, -1.0]   # physical-state functional -> dir<k>
    problem_params: {elements: 100, eps: 0.1}
    initial: {center: [...], radius: 0.1}   # or generators: [[...], ...]
    omega0: symbolic             # support scheme seed: symbolic | box
    seed: 0
    plot: false
    out_dir: runs/heat_rod

Set-propagation methods write ``flowpipe.csv`` (k, t_lo, t_hi, output_id,
lo, hi); integrators write ``trajectory.csv`` (k, t, output_id, value), or
``trajectory_lo.csv``/``trajectory_hi.csv`` when the initial family is a
one-parameter interval (the two extreme members are integrated).  Every run
writes ``manifest.json`` holding the fully resolved config, wall time, file
list, and per-output peak widths.

Exit codes: 0 ok, 2 config or usage error, 3 numeric failure, 1 any other
engine error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .discretize import discretize
from .errors import ConfigError, NumericError, ReachfemError
from .integrators import backward_euler, bathe, newmark
from .model import (
    SecondOrderSystem,
    assemble_bar_1d,
    assemble_heat_1d,
    constant_input,
    heat_gradient_directions,
    homogenize,
    load_system,
)
from .propagate import flowpipe_bounds, propagate_box, propagate_support, propagate_zonotope
from .sets import ConvexSet, Hyperrectangle, Zonotope

SETPROP_METHODS = ("setprop_box", "setprop_zono", "setprop_support")
INTEGRATOR_METHODS = ("backward_euler", "newmark", "bathe")
METHODS = SETPROP_METHODS + INTEGRATOR_METHODS
OUTPUT_KINDS = ("u", "v", "theta", "gradient", "direction")
BUILTIN_PROBLEMS = ("oscillator", "clamped_bar", "heat_rod")

_PARAM_DEFAULTS = {
    "oscillator": {"omega": 4.0 * np.pi},
    "clamped_bar": {
        "modulus": 30.0e6,
        "area": 1.0,
        "density": 7.3e-4,
        "length": 200.0,
        "elements": 200,
        "force": 1.0e4,
    },
    "heat_rod": {
        "conductivity": 1.0,
        "density": 1.0,
        "specific_heat": 1.0,
        "length": 1.0,
        "elements": 100,
        "eps": 0.1,
    },
}


# ---------------------------------------------------------------------------
# config loading and resolution
# ---------------------------------------------------------------------------


def _fail(path, message: str):
    raise ConfigError(f"{path}: {message}")


def load_config(path) -> dict:
    """Raw config dict from a YAML file or from a manifest's config block."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            _fail(path, f"invalid JSON: {exc}")
        if not isinstance(obj, dict) or "config" not in obj:
            _fail(path, "manifest has no 'config' block")
        raw = obj["config"]
    else:
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            _fail(path, f"invalid YAML: {exc}")
    if not isinstance(raw, dict):
        _fail(path, "config must be a mapping of keys to values")
    return raw


_KNOWN_KEYS = {
    "problem",
    "method",
    "delta",
    "steps",
    "horizon",
    "outputs",
    "problem_params",
    "initial",
    "omega0",
    "seed",
    "plot",
    "out_dir",
}


def resolve_config(raw: dict, where="config") -> dict:
    """Validated, fully explicit run description (JSON-serializable)."""
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        _fail(where, f"unknown keys: {', '.join(unknown)}")

    problem = raw.get("problem")
    if not isinstance(problem, str) or not problem:
        _fail(where, "missing or invalid 'problem'")
    if problem not in BUILTIN_PROBLEMS and not problem.endswith(".system"):
        _fail(
            where,
            f"unknown problem {problem!r}; expected one of {', '.join(BUILTIN_PROBLEMS)} "
            "or a path to a .system file",
        )

    method = raw.get("method")
    if method not in METHODS:
        _fail(where, f"unknown method {method!r}; expected one of {', '.join(METHODS)}")

    try:
        delta = float(raw.get("delta"))
    except (TypeError, ValueError):
        _fail(where, "missing or invalid 'delta'")
    if not np.isfinite(delta) or delta <= 0.0:
        _fail(where, f"delta must be a positive number, got {delta}")

    steps = raw.get("steps")
    horizon = raw.get("horizon")
    if steps is None and horizon is None:
        _fail(where, "give 'steps' or 'horizon'")
    if steps is not None:
        if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
            _fail(where, f"steps must be a positive integer, got {steps!r}")
    if horizon is not None:
        try:
            horizon = float(horizon)
        except (TypeError, ValueError):
            _fail(where, "invalid 'horizon'")
        if not np.isfinite(horizon) or horizon <= 0.0:
            _fail(where, f"horizon must be a positive number, got {horizon}")
        derived = int(round(horizon / delta))
        if derived < 1 or abs(derived * delta - horizon) > 1e-9 * max(horizon, delta):
            _fail(where, f"horizon {horizon} is not a whole number of steps of delta {delta}")
        if steps is None:
            steps = derived
        elif steps != derived:
            _fail(where, f"steps {steps} and horizon {horizon} disagree (horizon/delta = {derived})")

    omega0 = raw.get("omega0", "symbolic")
    if omega0 not in ("symbolic", "box"):
        _fail(where, f"omega0 must be 'symbolic' or 'box', got {omega0!r}")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail(where, f"seed must be an integer, got {seed!r}")

    plot = raw.get("plot", False)
    if not isinstance(plot, bool):
        _fail(where, f"plot must be true or false, got {plot!r}")

    params = raw.get("problem_params") or {}
    if not isinstance(params, dict):
        _fail(where, "problem_params must be a mapping")
    if problem in _PARAM_DEFAULTS:
        defaults = _PARAM_DEFAULTS[problem]
        unknown = sorted(set(params) - set(defaults))
        if unknown:
            _fail(where, f"unknown problem_params for {problem}: {', '.join(unknown)}")
        merged = dict(defaults)
        merged.update(params)
        for key, value in merged.items():
            if key == "elements":
                if not isinstance(value, int) or isinstance(value, bool) or value < 2:
                    _fail(where, f"elements must be an integer >= 2, got {value!r}")
            else:
                try:
                    merged[key] = float(value)
                except (TypeError, ValueError):
                    _fail(where, f"problem_params.{key} must be a number, got {value!r}")
        params = merged
    elif params:
        _fail(where, "problem_params apply to built-in problems only")

    initial = raw.get("initial")
    if initial is not None:
        if not isinstance(initial, dict):
            _fail(where, "initial must be a mapping")
        unknown = sorted(set(initial) - {"center", "radius", "generators"})
        if unknown:
            _fail(where, f"unknown initial keys: {', '.join(unknown)}")
        if "center" not in initial:
            _fail(where, "initial needs a 'center'")
        if "radius" in initial and "generators" in initial:
            _fail(where, "give initial 'radius' or 'generators', not both")

    outputs = raw.get("outputs")
    if outputs is not None:
        if not isinstance(outputs, list) or not outputs:
            _fail(where, "outputs must be a non-empty list")
        outputs = [_normalize_output(entry, where) for entry in outputs]

    out_dir = raw.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        _fail(where, "out_dir must be a string")

    return {
        "problem": problem,
        "method": method,
        "delta": delta,
        "steps": int(steps),
        "horizon": float(steps) * delta,
        "omega0": omega0,
        "seed": seed,
        "plot": plot,
        "problem_params": params,
        "initial": initial,
        "outputs": outputs,
        "out_dir": out_dir,
    }


def _normalize_output(entry, where) -> dict:
    if not isinstance(entry, dict) or len(entry) != 1:
        _fail(where, f"each output must be a single 'kind: value' entry, got {entry!r}")
    kind, value = next(iter(entry.items()))
    if kind not in OUTPUT_KINDS:
        _fail(where, f"unknown output kind {kind!r}; expected one of {', '.join(OUTPUT_KINDS)}")
    if kind == "direction":
        if not isinstance(value, (list, tuple)) or not value:
            _fail(where, "direction output needs a list of coefficients")
        try:
            value = [float(x) for x in value]
        except (TypeError, ValueError):
            _fail(where, f"direction coefficients must be numbers, got {value!r}")
    else:
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            _fail(where, f"output {kind} needs a non-negative integer index, got {value!r}")
    return {kind: value}


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


@dataclass
class _Problem:
    name: str
    system: SecondOrderSystem
    initial: ConvexSet
    gradient_rows: Optional[np.ndarray]
    default_outputs: list


def _initial_from_spec(spec, state_dim: int, default: Optional[ConvexSet]) -> ConvexSet:
    if spec is None:
        if default is None:
            raise ConfigError("this problem needs an explicit 'initial' section")
        return default
    center = np.asarray(spec["center"], dtype=float)
    if center.ndim == 0:
        center = np.full(state_dim, float(center))
    if center.shape != (state_dim,):
        raise ConfigError(
            f"initial center has {center.size} entries, the problem has {state_dim} states"
        )
    if "generators" in spec:
        gens = np.atleast_2d(np.asarray(spec["generators"], dtype=float))
        if gens.shape[1] != state_dim:
            raise ConfigError(
                f"each initial generator needs {state_dim} entries, got {gens.shape[1]}"
            )
        return Zonotope(center, gens.T)
    radius = np.asarray(spec.get("radius", 0.0), dtype=float)
    if radius.ndim == 0:
        radius = np.full(state_dim, float(radius))
    if radius.shape != (state_dim,):
        raise ConfigError(
            f"initial radius has {radius.size} entries, the problem has {state_dim} states"
        )
    if np.any(radius < 0.0):
        raise ConfigError("initial radius entries must be non-negative")
    return Hyperrectangle(center, radius)


def rod_profile(elements: int, length: float = 1.0) -> np.ndarray:
    """Nominal rod temperature at the free nodes: sin(pi x/L) + sin(3 pi x/L)/2."""
    x = np.arange(1, elements) * (length / elements)
    return np.sin(np.pi * x / length) + 0.5 * np.sin(3.0 * np.pi * x / length)


def build_problem(resolved: dict, base_dir=".") -> _Problem:
    """Assemble the system and initial family named by a resolved config."""
    problem = resolved["problem"]
    params = resolved["problem_params"]
    spec = resolved["initial"]

    if problem == "oscillator":
        omega = params["omega"]
        if omega <= 0.0:
            raise ConfigError(f"oscillator omega must be positive, got {omega}")
        system = SecondOrderSystem(
            "dynamics", np.array([[omega * omega]]), mass=np.array([[1.0]])
        )
        default = Hyperrectangle(np.array([1.0, 0.0]), np.array([0.1, 0.1]))
        initial = _initial_from_spec(spec, 2, default)
        return _Problem(problem, system, initial, None, [{"u": 0}, {"v": 0}])

    if problem == "clamped_bar":
        elements = params["elements"]
        bare = assemble_bar_1d(
            params["modulus"], params["area"], params["density"], params["length"], elements
        )
        tip = np.zeros(elements)
        tip[-1] = params["force"]
        system = replace(bare, inputs=(constant_input(tip),))
        default = Hyperrectangle(np.zeros(2 * elements), np.zeros(2 * elements))
        initial = _initial_from_spec(spec, 2 * elements, default)
        watch = int(round(0.7 * elements)) - 1
        return _Problem(problem, system, initial, None, [{"u": watch}])

    if problem == "heat_rod":
        elements = params["elements"]
        system = assemble_heat_1d(
            params["conductivity"],
            params["density"],
            params["specific_heat"],
            params["length"],
            elements,
        )
        profile = rod_profile(elements, params["length"])
        default = Zonotope(profile, (params["eps"] * profile)[:, None])
        initial = _initial_from_spec(spec, elements - 1, default)
        rows = heat_gradient_directions(elements, params["length"])
        return _Problem(problem, system, initial, rows, [{"theta": elements // 2 - 1}])

    path = Path(problem)
    if not path.is_absolute():
        path = Path(base_dir) / path
    system = load_system(path)
    initial = _initial_from_spec(spec, system.state_dim, None)
    if system.kind == "heat":
        default_outputs = [{"theta": system.n // 2}]
    else:
        default_outputs = [{"u": system.n - 1}]
    return _Problem(path.stem, system, initial, None, default_outputs)


# ---------------------------------------------------------------------------
# output resolution
# ---------------------------------------------------------------------------


@dataclass
class _Output:
    oid: str
    kind: str
    dof: Optional[int]
    homog_index: Optional[int]  # canonical state index, when the output is one
    vector: Optional[np.ndarray]  # physical-state functional, otherwise


def resolve_outputs(resolved: dict, problem: _Problem) -> list:
    raw = resolved["outputs"] or problem.default_outputs
    system = problem.system
    outs = []
    for pos, entry in enumerate(raw):
        kind, value = next(iter(entry.items()))
        if kind in ("u", "v"):
            if system.kind != "dynamics":
                raise ConfigError(f"output {kind}:{value} needs a dynamics problem")
            if not 0 <= value < system.n:
                raise ConfigError(f"output {kind}:{value} out of range (n = {system.n})")
            index = value if kind == "u" else system.n + value
            outs.append(_Output(f"{kind}{value}", kind, value, index, None))
        elif kind == "theta":
            if system.kind != "heat":
                raise ConfigError(f"output theta:{value} needs a heat problem")
            if not 0 <= value < system.n:
                raise ConfigError(f"output theta:{value} out of range (n = {system.n})")
            outs.append(_Output(f"theta{value}", kind, value, value, None))
        elif kind == "gradient":
            if problem.gradient_rows is None:
                raise ConfigError("gradient outputs are only available for the heat_rod problem")
            if not 0 <= value < problem.gradient_rows.shape[0]:
                raise ConfigError(
                    f"gradient element {value} out of range "
                    f"({problem.gradient_rows.shape[0]} elements)"
                )
            outs.append(_Output(f"grad{value}", kind, value, None, problem.gradient_rows[value]))
        else:
            vec = np.asarray(value, dtype=float)
            if vec.shape != (system.state_dim,):
                raise ConfigError(
                    f"direction output needs {system.state_dim} coefficients, got {vec.size}"
                )
            outs.append(_Output(f"dir{pos}", kind, None, None, vec))
    seen = set()
    for out in outs:
        if out.oid in seen:
            raise ConfigError(f"duplicate output {out.oid}")
        seen.add(out.oid)
    if resolved["method"] == "setprop_box":
        bad = [out.oid for out in outs if out.vector is not None]
        if bad:
            raise ConfigError(
                "the box scheme reports coordinate ranges only; "
                f"use setprop_zono or setprop_support for {', '.join(bad)}"
            )
    return outs


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _pad_direction(vector: np.ndarray, dim: int) -> np.ndarray:
    full = np.zeros(dim)
    full[: vector.shape[0]] = vector
    return full


def _homog_direction(out: _Output, dim: int) -> np.ndarray:
    if out.homog_index is not None:
        d = np.zeros(dim)
        d[out.homog_index] = 1.0
        return d
    return _pad_direction(out.vector, dim)


def _run_setprop(resolved: dict, problem: _Problem, outputs: list) -> dict:
    method = resolved["method"]
    delta, steps = resolved["delta"], resolved["steps"]
    linear = homogenize(problem.system, initial=problem.initial)
    mode = "box" if method in ("setprop_box", "setprop_zono") else resolved["omega0"]
    prob = discretize(linear, delta, steps, mode=mode)
    seed_set = prob.omega0_box if mode == "box" else prob.omega0
    if method == "setprop_box":
        fp = propagate_box(prob.phi, seed_set, steps, delta, system=problem.name)
    elif method == "setprop_zono":
        fp = propagate_zonotope(prob.phi, seed_set, steps, delta, system=problem.name)
    else:
        directions = np.vstack([_homog_direction(out, linear.dim) for out in outputs])
        fp = propagate_support(prob.phi, seed_set, directions, steps, delta, system=problem.name)

    columns = {}
    for out in outputs:
        if method == "setprop_support" or out.homog_index is None:
            bounds = flowpipe_bounds(fp, direction=_homog_direction(out, linear.dim))
        else:
            bounds = flowpipe_bounds(fp, index=out.homog_index)
        columns[out.oid] = bounds
    return {"kind": "flowpipe", "columns": columns}


def _integrator_starts(initial: ConvexSet) -> list:
    if isinstance(initial, Zonotope):
        gens = initial.generators
        live = [j for j in range(gens.shape[1]) if np.any(gens[:, j])]
        if not live:
            return [("", initial.center)]
        if len(live) == 1:
            g = gens[:, live[0]]
            return [("lo", initial.center - g), ("hi", initial.center + g)]
    elif isinstance(initial, Hyperrectangle):
        if not np.any(initial.radius):
            return [("", initial.center)]
        return [("lo", initial.center - initial.radius), ("hi", initial.center + initial.radius)]
    raise ConfigError(
        "classical integrators run point initial states; give a degenerate initial "
        "or a one-parameter family (single generator / interval radius)"
    )


def _trajectory_series(traj, system: SecondOrderSystem, out: _Output) -> np.ndarray:
    if system.kind == "heat":
        field = traj.temperature
        if out.kind == "theta":
            return field[:, out.dof]
        return field @ out.vector
    if out.kind == "u":
        return traj.displacement[:, out.dof]
    if out.kind == "v":
        return traj.velocity[:, out.dof]
    n = system.n
    return traj.displacement @ out.vector[:n] + traj.velocity @ out.vector[n:]


def _run_integrator(resolved: dict, problem: _Problem, outputs: list) -> dict:
    method = resolved["method"]
    system = problem.system
    if system.kind == "heat" and method != "backward_euler":
        raise ConfigError(f"{method} integrates dynamics problems; use backward_euler")
    if system.kind == "dynamics" and method == "backward_euler":
        raise ConfigError("backward_euler integrates heat problems; use newmark or bathe")
    for out in outputs:
        if out.kind == "gradient" and system.kind != "heat":
            raise ConfigError("gradient outputs are only available for the heat_rod problem")

    forcing = system.forcing_function() if system.inputs else None
    delta, steps = resolved["delta"], resolved["steps"]
    runs = []
    for label, start in _integrator_starts(problem.initial):
        if system.kind == "heat":
            traj = backward_euler(system, forcing, start, delta, steps)
        else:
            n = system.n
            stepper = newmark if method == "newmark" else bathe
            traj = stepper(system, forcing, start[:n], start[n:], delta, steps)
        series = {out.oid: _trajectory_series(traj, system, out) for out in outputs}
        runs.append((label, traj.times, series))
    return {"kind": "trajectory", "runs": runs}


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def _write_flowpipe_csv(path, outputs: list, columns: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t_lo", "t_hi", "output_id", "lo", "hi"])
        length = len(next(iter(columns.values())))
        for k in range(length):
            for out in outputs:
                t_lo, t_hi, lo, hi = columns[out.oid][k]
                writer.writerow([k, _g17(t_lo), _g17(t_hi), out.oid, _g17(lo), _g17(hi)])


def _write_trajectory_csv(path, outputs: list, times, series: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t", "output_id", "value"])
        for k, t in enumerate(times):
            for out in outputs:
                writer.writerow([k, _g17(t), out.oid, _g17(series[out.oid][k])])


def _peak_widths(result: dict, outputs: list) -> dict:
    widths = {}
    if result["kind"] == "flowpipe":
        for out in outputs:
            bounds = result["columns"][out.oid]
            widths[out.oid] = float(max(hi - lo for _, _, lo, hi in bounds))
    else:
        runs = result["runs"]
        for out in outputs:
            stacked = np.vstack([series[out.oid] for _, _, series in runs])
            widths[out.oid] = float(np.max(stacked.max(axis=0) - stacked.min(axis=0)))
    return widths


def _write_plots(out_dir: Path, result: dict, outputs: list) -> list:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    if result["kind"] == "flowpipe":
        for out in outputs:
            bounds = result["columns"][out.oid]
            ts = np.repeat([row[0] for row in bounds], 2)
            ts[1::2] = [row[1] for row in bounds]
            lo = np.repeat([row[2] for row in bounds], 2)
            hi = np.repeat([row[3] for row in bounds], 2)
            fig, ax = plt.subplots(figsize=(7.0, 3.2))
            ax.fill_between(ts, lo, hi, color="#4477aa", alpha=0.4, linewidth=0.0)
            ax.set_xlabel("t")
            ax.set_ylabel(out.oid)
            fig.tight_layout()
            name = f"flowpipe_{out.oid}.svg"
            fig.savefig(out_dir / name)
            plt.close(fig)
            written.append(name)
    else:
        for out in outputs:
            fig, ax = plt.subplots(figsize=(7.0, 3.2))
            for label, times, series in result["runs"]:
                ax.plot(times, series[out.oid], linewidth=1.0, label=label or None)
            ax.set_xlabel("t")
            ax.set_ylabel(out.oid)
            if len(result["runs"]) > 1:
                ax.legend(loc="best")
            fig.tight_layout()
            name = f"trajectory_{out.oid}.svg"
            fig.savefig(out_dir / name)
            plt.close(fig)
            written.append(name)
    return written


def run(resolved: dict, out_dir, base_dir=".") -> dict:
    """Execute a resolved config, write artifacts into out_dir, return the manifest."""
    started = time.perf_counter()
    problem = build_problem(resolved, base_dir)
    outputs = resolve_outputs(resolved, problem)
    if resolved["method"] in SETPROP_METHODS:
        result = _run_setprop(resolved, problem, outputs)
    else:
        result = _run_integrator(resolved, problem, outputs)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    if result["kind"] == "flowpipe":
        _write_flowpipe_csv(out_dir / "flowpipe.csv", outputs, result["columns"])
        files.append("flowpipe.csv")
    else:
        for label, times, series in result["runs"]:
            name = f"trajectory_{label}.csv" if label else "trajectory.csv"
            _write_trajectory_csv(out_dir / name, outputs, times, series)
            files.append(name)
    if resolved["plot"]:
        files.extend(_write_plots(out_dir, result, outputs))

    manifest = {
        "config": resolved,
        "files": files,
        "peak_widths": _peak_widths(result, outputs),
        "wall_time_s": time.perf_counter() - started,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _apply_overrides(raw: dict, args) -> dict:
    raw = dict(raw)
    if args.method is not None:
        raw["method"] = args.method
    if args.delta is not None:
        raw["delta"] = args.delta
        if "steps" in raw:
            raw.pop("horizon", None)  # keep the explicit step count
    if args.steps is not None:
        raw["steps"] = args.steps
        raw.pop("horizon", None)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.plot:
        raw["plot"] = True
    return raw


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    raw = _apply_overrides(load_config(config_path), args)
    resolved = resolve_config(raw, where=config_path)
    out_dir = args.out_dir or resolved["out_dir"] or f"runs/{config_path.stem}"
    resolved["out_dir"] = str(out_dir)
    manifest = run(resolved, out_dir, base_dir=config_path.parent)
    print(f"wrote {', '.join(manifest['files'])} and manifest.json to {out_dir}")
    return 0


def _cmd_validate(args) -> int:
    config_path = Path(args.config)
    resolved = resolve_config(load_config(config_path), where=config_path)
    problem = build_problem(resolved, base_dir=config_path.parent)
    outputs = resolve_outputs(resolved, problem)
    system = problem.system
    print(f"ok: problem {problem.name} ({system.kind}, {system.n} dofs)")
    print(
        f"ok: method {resolved['method']}, delta {resolved['delta']:g}, "
        f"steps {resolved['steps']} (horizon {resolved['horizon']:g})"
    )
    print(f"ok: outputs {', '.join(out.oid for out in outputs)}")
    return 0


def demo_names() -> list:
    root = resources.files(__package__) / "configs"
    return sorted(path.name[: -len(".yaml")] for path in root.iterdir() if path.name.endswith(".yaml"))


def _cmd_demo(args) -> int:
    names = demo_names()
    if args.list or args.name is None:
        print("\n".join(names))
        return 0
    if args.name not in names:
        raise ConfigError(f"unknown demo {args.name!r}; available: {', '.join(names)}")
    config_dir = resources.files(__package__) / "configs"
    raw = _apply_overrides(yaml.safe_load((config_dir / f"{args.name}.yaml").read_text()), args)
    resolved = resolve_config(raw, where=f"demo {args.name}")
    out_dir = args.out_dir or resolved["out_dir"] or f"runs/{args.name}"
    resolved["out_dir"] = str(out_dir)
    manifest = run(resolved, out_dir, base_dir=Path(str(config_dir)))
    print(f"wrote {', '.join(manifest['files'])} and manifest.json to {out_dir}")
    return 0


def _add_override_flags(parser, with_steps=True) -> None:
    parser.add_argument("--method", choices=METHODS, help="override the config's method")
    parser.add_argument("--delta", type=float, help="override the step size")
    if with_steps:
        parser.add_argument("--steps", type=int, help="override the step count")
    parser.add_argument("--seed", type=int, help="override the recorded seed")
    parser.add_argument("--plot", action="store_true", help="also write SVG plots")
    parser.add_argument("--out-dir", help="directory for artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachfem",
        description="Guaranteed flowpipe enclosures and classical integrators "
        "for linear transient FEM problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config (YAML, or a manifest.json to re-run)")
    p_run.add_argument("config")
    _add_override_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_demo = sub.add_parser("demo", help="run a packaged example config")
    p_demo.add_argument("name", nargs="?")
    p_demo.add_argument("--list", action="store_true", help="list demo names")
    _add_override_flags(p_demo)
    p_demo.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except ReachfemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
