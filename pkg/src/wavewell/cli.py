"""Command-line front end: config ingestion, subcommand dispatch, artifacts.

Subcommands
-----------
``constants``   compute the well-geometry constants, emit JSON (+ short text)
``simulate``    one run: trajectory.csv, summary.json, audit.json
``classify``    classification only, no integration
``sweep``       grid of runs over (q, p, amplitude): results.jsonl + phase table
``fit``         re-fit decay laws to an existing trajectory.csv

Configs are JSON.  Unknown keys are rejected; every diagnostic names the full
field path (e.g. ``problem.q``).  Scientific outcomes — blow-up, underflow,
``no_prediction`` — exit 0; only config/tool errors are nonzero.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv as _csv
import dataclasses
import itertools
import json
import math
import sys
from collections import Counter
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .dynamics import IntegratorConfig, Trajectory, integrate
from .errors import ConfigurationError, InapplicableError
from .field import (
    DomainGrid,
    ModalState,
    assemble_stiffness,
    make_coefficient_field,
)
from .functionals import CSV_COLUMNS, EnergyRecord, Exponents, csv_header
from .lab import audit, classify, fit_decay
from .varconst import compute_well_geometry, embedding_b6, xi1_estimate

__all__ = [
    "ProblemSpec",
    "InitialSpec",
    "OutputSpec",
    "RunConfig",
    "parse_config",
    "load_config",
    "main",
]

_MISSING = object()


def _mapping(value, path: str) -> dict:
    if value is _MISSING:
        return {}
    if not isinstance(value, dict):
        raise ConfigurationError(f"{path} must be a mapping")
    return value


def _reject_unknown(section: dict, allowed, path: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {path}.{key}" if path else f"unknown key {key}")


def _number(section: dict, key: str, path: str, default=_MISSING) -> float:
    if key not in section:
        if default is _MISSING:
            raise ConfigurationError(f"missing required field {path}.{key}")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{path}.{key} must be a number, got {v!r}")
    return float(v)


def _integer(section: dict, key: str, path: str, default=_MISSING) -> int:
    if key not in section:
        if default is _MISSING:
            raise ConfigurationError(f"missing required field {path}.{key}")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(f"{path}.{key} must be an integer, got {v!r}")
    return v


def _string(section: dict, key: str, path: str, default=_MISSING) -> str:
    if key not in section:
        if default is _MISSING:
            raise ConfigurationError(f"missing required field {path}.{key}")
        return default
    v = section[key]
    if not isinstance(v, str):
        raise ConfigurationError(f"{path}.{key} must be a string, got {v!r}")
    return v


def _number_list(section: dict, key: str, path: str, default=_MISSING) -> list[float]:
    if key not in section:
        if default is _MISSING:
            raise ConfigurationError(f"missing required field {path}.{key}")
        return list(default)
    v = section[key]
    if not isinstance(v, list) or not v or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) for x in v
    ):
        raise ConfigurationError(f"{path}.{key} must be a nonempty list of numbers, got {v!r}")
    return [float(x) for x in v]


@dataclasses.dataclass(frozen=True)
class ProblemSpec:
    length: float
    n_modes: int
    q: float
    p: float
    a_family: str
    a_params: tuple[float, ...]
    mu_family: str
    mu_params: tuple[float, ...]
    damping_family: str

    def exponents(self) -> Exponents:
        return Exponents(q=self.q, p=self.p)

    def grid(self) -> DomainGrid:
        return DomainGrid(length=self.length, n_modes=self.n_modes)

    def coefficients(self, horizon: float):
        return make_coefficient_field(
            length=self.length,
            a_family=self.a_family,
            a_params=self.a_params,
            mu_family=self.mu_family,
            mu_params=self.mu_params,
            horizon=horizon,
        )


@dataclasses.dataclass(frozen=True)
class InitialSpec:
    """Initial data: a named shape (single mode or gaussian bump) or raw modal lists."""

    kind: str
    index: int = 1
    amplitude: float = 0.0
    velocity: float = 0.0
    center: float = 0.0
    width: float = 0.0
    u0: tuple[float, ...] = ()
    u1: tuple[float, ...] = ()

    def build_state(self, grid: DomainGrid) -> ModalState:
        k = grid.n_modes
        if self.kind == "mode":
            if not 1 <= self.index <= k:
                raise ConfigurationError(
                    f"initial.index must lie in [1, {k}], got {self.index}"
                )
            u = np.zeros(k)
            v = np.zeros(k)
            u[self.index - 1] = self.amplitude
            v[self.index - 1] = self.velocity
            return ModalState(t=0.0, u_coeffs=u, v_coeffs=v)
        if self.kind == "gaussian":
            shape = np.exp(-((grid.nodes - self.center) ** 2) / (2.0 * self.width**2))
            return ModalState(
                t=0.0,
                u_coeffs=grid.project(self.amplitude * shape),
                v_coeffs=grid.project(self.velocity * shape),
            )
        if self.kind == "modal":
            u = np.zeros(k)
            v = np.zeros(k)
            if len(self.u0) > k or len(self.u1) > k:
                raise ConfigurationError(
                    f"initial coefficient lists exceed n_modes = {k}"
                )
            u[: len(self.u0)] = self.u0
            v[: len(self.u1)] = self.u1
            return ModalState(t=0.0, u_coeffs=u, v_coeffs=v)
        raise ConfigurationError(f"unknown initial.kind {self.kind!r}")


@dataclasses.dataclass(frozen=True)
class OutputSpec:
    directory: Optional[str]
    cadence: Optional[float]
    seed: int


@dataclasses.dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec
    initial: InitialSpec
    integrator: IntegratorConfig
    constants: dict
    output: OutputSpec
    sweep: dict
    echo: dict


def parse_config(raw: Any) -> RunConfig:
    """Validate a loaded JSON document into a RunConfig.

    The returned config's ``echo`` is the fully normalized document (defaults
    filled in); feeding the echo back through parse_config reproduces the
    identical config.
    """
    top = _mapping(raw, "config")
    _reject_unknown(top, {"problem", "initial", "integrator", "constants", "output", "sweep"}, "")

    prob = _mapping(top.get("problem", _MISSING), "problem")
    _reject_unknown(
        prob,
        {"length", "n_modes", "q", "p", "a_family", "a_params", "mu_family", "mu_params", "damping_family"},
        "problem",
    )
    damping_family = _string(prob, "damping_family", "problem", "power_law")
    if damping_family not in ("power_law", "none"):
        raise ConfigurationError(
            f"problem.damping_family must be 'power_law' or 'none', got {damping_family!r}"
        )
    problem = ProblemSpec(
        length=_number(prob, "length", "problem", math.pi),
        n_modes=_integer(prob, "n_modes", "problem", 32),
        q=_number(prob, "q", "problem"),
        p=_number(prob, "p", "problem", 0.0),
        a_family=_string(prob, "a_family", "problem", "constant"),
        a_params=tuple(_number_list(prob, "a_params", "problem", (1.0,))),
        mu_family=_string(prob, "mu_family", "problem", "constant"),
        mu_params=tuple(_number_list(prob, "mu_params", "problem", (1.0,))),
        damping_family=damping_family,
    )

    init = _mapping(top.get("initial", _MISSING), "initial")
    kind = _string(init, "kind", "initial", "mode")
    if kind == "mode":
        _reject_unknown(init, {"kind", "index", "amplitude", "velocity"}, "initial")
        initial = InitialSpec(
            kind="mode",
            index=_integer(init, "index", "initial", 1),
            amplitude=_number(init, "amplitude", "initial", 0.1),
            velocity=_number(init, "velocity", "initial", 0.0),
        )
    elif kind == "gaussian":
        _reject_unknown(init, {"kind", "center", "width", "amplitude", "velocity"}, "initial")
        width = _number(init, "width", "initial")
        if width <= 0:
            raise ConfigurationError(f"initial.width must be positive, got {width}")
        initial = InitialSpec(
            kind="gaussian",
            center=_number(init, "center", "initial"),
            width=width,
            amplitude=_number(init, "amplitude", "initial"),
            velocity=_number(init, "velocity", "initial", 0.0),
        )
    elif kind == "modal":
        _reject_unknown(init, {"kind", "u0", "u1"}, "initial")
        initial = InitialSpec(
            kind="modal",
            u0=tuple(_number_list(init, "u0", "initial")),
            u1=tuple(_number_list(init, "u1", "initial", ())),
        )
    else:
        raise ConfigurationError(
            f"initial.kind must be 'mode', 'gaussian' or 'modal', got {kind!r}"
        )

    out = _mapping(top.get("output", _MISSING), "output")
    _reject_unknown(out, {"directory", "cadence", "seed"}, "output")
    cadence = _number(out, "cadence", "output", None) if "cadence" in out else None
    output = OutputSpec(
        directory=_string(out, "directory", "output", None) if "directory" in out else None,
        cadence=cadence,
        seed=_integer(out, "seed", "output", 0),
    )

    integ = _mapping(top.get("integrator", _MISSING), "integrator")
    _reject_unknown(
        integ,
        {"t_end", "rel_tol", "abs_tol", "dt_init", "dt_min", "dt_max", "blowup_l2_threshold"},
        "integrator",
    )
    try:
        integrator = IntegratorConfig(
            t_end=_number(integ, "t_end", "integrator", 10.0),
            rel_tol=_number(integ, "rel_tol", "integrator", 1e-8),
            abs_tol=_number(integ, "abs_tol", "integrator", 1e-10),
            dt_init=_number(integ, "dt_init", "integrator", None) if "dt_init" in integ else None,
            dt_min=_number(integ, "dt_min", "integrator", 1e-12),
            dt_max=_number(integ, "dt_max", "integrator", 0.25),
            blowup_l2_threshold=_number(integ, "blowup_l2_threshold", "integrator", 1e8),
            record_every=output.cadence,
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"integrator: {exc}") from None

    cons = _mapping(top.get("constants", _MISSING), "constants")
    _reject_unknown(
        cons,
        {"gamma_min", "gamma_max", "n_gamma", "n_restarts", "continuation_restarts", "d_samples", "max_doublings"},
        "constants",
    )
    constants = {
        "gamma_min": _number(cons, "gamma_min", "constants", 1e-3),
        "gamma_max": _number(cons, "gamma_max", "constants", 50.0),
        "n_gamma": _integer(cons, "n_gamma", "constants", 33),
        "n_restarts": _integer(cons, "n_restarts", "constants", 8),
        "continuation_restarts": _integer(cons, "continuation_restarts", "constants", 2),
        "d_samples": _integer(cons, "d_samples", "constants", 16),
        "max_doublings": _integer(cons, "max_doublings", "constants", 4),
    }

    swp = _mapping(top.get("sweep", _MISSING), "sweep")
    _reject_unknown(swp, {"q", "p", "amplitude"}, "sweep")
    if "amplitude" in swp or initial.kind != "modal":
        amplitudes = _number_list(swp, "amplitude", "sweep", (initial.amplitude,))
    else:
        amplitudes = None  # modal data is swept as given, with no amplitude axis
    sweep = {
        "q": _number_list(swp, "q", "sweep", (problem.q,)),
        "p": _number_list(swp, "p", "sweep", (problem.p,)),
        "amplitude": amplitudes,
    }

    echo = {
        "problem": {
            "length": problem.length,
            "n_modes": problem.n_modes,
            "q": problem.q,
            "p": problem.p,
            "a_family": problem.a_family,
            "a_params": list(problem.a_params),
            "mu_family": problem.mu_family,
            "mu_params": list(problem.mu_params),
            "damping_family": problem.damping_family,
        },
        "initial": {
            "kind": initial.kind,
            **(
                {"index": initial.index, "amplitude": initial.amplitude, "velocity": initial.velocity}
                if initial.kind == "mode"
                else {}
            ),
            **(
                {
                    "center": initial.center,
                    "width": initial.width,
                    "amplitude": initial.amplitude,
                    "velocity": initial.velocity,
                }
                if initial.kind == "gaussian"
                else {}
            ),
            **({"u0": list(initial.u0), "u1": list(initial.u1)} if initial.kind == "modal" else {}),
        },
        "integrator": {
            "t_end": integrator.t_end,
            "rel_tol": integrator.rel_tol,
            "abs_tol": integrator.abs_tol,
            **({"dt_init": integrator.dt_init} if integrator.dt_init is not None else {}),
            "dt_min": integrator.dt_min,
            "dt_max": integrator.dt_max,
            "blowup_l2_threshold": integrator.blowup_l2_threshold,
        },
        "constants": dict(constants),
        "output": {
            **({"directory": output.directory} if output.directory is not None else {}),
            **({"cadence": output.cadence} if output.cadence is not None else {}),
            "seed": output.seed,
        },
        "sweep": {k: list(v) for k, v in sweep.items() if v is not None},
    }

    return RunConfig(
        problem=problem,
        initial=initial,
        integrator=integrator,
        constants=constants,
        output=output,
        sweep=sweep,
        echo=echo,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from None
    return parse_config(raw)


# ---------------------------------------------------------------------------
# shared build steps
# ---------------------------------------------------------------------------


def _build(rc: RunConfig):
    grid = rc.problem.grid()
    try:
        coeff = rc.problem.coefficients(horizon=rc.integrator.t_end)
    except ConfigurationError as exc:
        raise ConfigurationError(f"problem: {exc}") from None
    exps = rc.problem.exponents()
    stiffness = assemble_stiffness(grid, coeff)
    state0 = rc.initial.build_state(grid)
    return grid, coeff, exps, stiffness, state0


def _geometry(rc: RunConfig, grid, stiffness, coeff, exps, seed: int):
    return compute_well_geometry(grid, stiffness, coeff, exps, seed=seed, **rc.constants)


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _auxiliary_params(classification, state0, grid, exps, coeff, seed):
    """(eps, alpha) for the blow-up functional column, when the argument applies."""
    alpha = exps.alpha
    if not (classification.E0 < 0.0 and exps.q > exps.p + 2.0 and 0.0 < alpha < 0.5):
        return None
    try:
        b6 = embedding_b6(grid, exps, n_restarts=8, seed=seed).value
        pairing0 = float(state0.u_coeffs @ state0.v_coeffs)
        _, eps, _ = xi1_estimate(exps, coeff.mu0, b6, -classification.E0, pairing0)
        return (eps, alpha)
    except InapplicableError:
        return None


def _resolve_out(rc: RunConfig, out_arg: Optional[str], command: str) -> Optional[Path]:
    if out_arg is not None:
        return Path(out_arg)
    if rc.output.directory is not None:
        return Path(rc.output.directory)
    if command in ("simulate", "sweep", "fit"):
        raise ConfigurationError(
            f"{command} needs an output directory: pass --out or set output.directory"
        )
    return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_constants(rc: RunConfig, out_dir: Optional[Path], seed: int, workers: int) -> int:
    grid, coeff, exps, stiffness, _ = _build(rc)
    geometry = _geometry(rc, grid, stiffness, coeff, exps, seed)
    print(
        f"well geometry: q={exps.q} p={exps.p} modes={grid.n_modes} "
        f"r_star={geometry.r_star:.6g} rho_star={geometry.rho_star:.6g} "
        f"M={geometry.M:.6g} d_estimate={geometry.d_estimate:.6g}"
    )
    blob = _dump(geometry.to_json_dict())
    print(blob)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "geometry.json").write_text(blob + "\n")
    return 0


def cmd_classify(rc: RunConfig, out_dir: Optional[Path], seed: int, workers: int) -> int:
    grid, coeff, exps, stiffness, state0 = _build(rc)
    geometry = _geometry(rc, grid, stiffness, coeff, exps, seed)
    cls = classify(state0, geometry, exps, coeff, grid=grid, stiffness=stiffness)
    print(f"membership={cls.set_membership} predicted={cls.predicted}")
    blob = _dump(cls.to_json_dict())
    print(blob)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "classification.json").write_text(blob + "\n")
    return 0


def _run_simulation(rc: RunConfig, out_dir: Path, seed: int) -> tuple[dict, str]:
    """Integrate one configured run into ``out_dir``; returns (summary, audit table)."""
    grid, coeff, exps, stiffness, state0 = _build(rc)
    geometry = _geometry(rc, grid, stiffness, coeff, exps, seed)
    cls = classify(state0, geometry, exps, coeff, grid=grid, stiffness=stiffness)
    y_params = _auxiliary_params(cls, state0, grid, exps, coeff, seed)

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "trajectory.csv", "w", encoding="utf-8") as fh:
        fh.write(csv_header() + "\n")
        trajectory = integrate(
            state0,
            grid,
            coeff,
            exps,
            rc.integrator,
            stiffness=stiffness,
            include_damping=rc.problem.damping_family != "none",
            y_params=y_params,
            on_record=lambda rec: fh.write(rec.csv_row() + "\n"),
        )

    fits: Any = None
    if trajectory.outcome_flag == "completed":
        try:
            fits = [f.to_json_dict() for f in fit_decay(trajectory, exps.p)]
        except InapplicableError as exc:
            fits = {"inapplicable": str(exc)}

    report = audit(trajectory, cls, geometry)
    (out_dir / "audit.json").write_text(report.to_json() + "\n")

    summary = {
        "config_echo": rc.echo,
        "classification": cls.to_json_dict(),
        "outcome_flag": trajectory.outcome_flag,
        "t_detect": None if trajectory.blowup_report is None else trajectory.blowup_report.t_detect,
        "fits": fits,
        "geometry_digest": geometry.digest(),
    }
    (out_dir / "summary.json").write_text(_dump(summary) + "\n")
    return summary, report.table()


def cmd_simulate(rc: RunConfig, out_dir: Path, seed: int, workers: int) -> int:
    summary, table = _run_simulation(rc, out_dir, seed)
    cls = summary["classification"]
    print(
        f"predicted={cls['predicted']} observed={summary['outcome_flag']}"
        + ("" if summary["t_detect"] is None else f" t_detect={summary['t_detect']:.6g}")
    )
    print(table)
    return 0


def _read_trajectory_csv(path: Path) -> tuple[EnergyRecord, ...]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ConfigurationError(f"{path} does not carry the expected trajectory schema")
        records = []
        for row in reader:
            vals = dict(zip(header, row))
            y_txt = vals.pop("Y")
            records.append(
                EnergyRecord(
                    Y_available=y_txt != "",
                    Y=float(y_txt) if y_txt else 0.0,
                    **{k: float(v) for k, v in vals.items()},
                )
            )
    if not records:
        raise ConfigurationError(f"{path} holds no records")
    return tuple(records)


def cmd_fit(rc: RunConfig, out_dir: Path, seed: int, workers: int) -> int:
    records = _read_trajectory_csv(out_dir / "trajectory.csv")
    grid, coeff, exps, stiffness, state0 = _build(rc)
    trajectory = Trajectory(
        records=records,
        states_sampled=(),
        outcome_flag="completed",
        config=rc.integrator,
        blowup_report=None,
        exponents=exps,
        coeff=coeff,
    )
    try:
        fits: Any = [f.to_json_dict() for f in fit_decay(trajectory, exps.p)]
    except InapplicableError as exc:
        fits = {"inapplicable": str(exc)}
    blob = _dump({"fits": fits})
    print(blob)
    (out_dir / "fits.json").write_text(blob + "\n")
    return 0


def _sweep_variant(echo: dict, q: float, p: float, amplitude: Optional[float]) -> RunConfig:
    doc = json.loads(json.dumps(echo))
    doc["problem"]["q"] = q
    doc["problem"]["p"] = p
    doc.pop("sweep", None)
    doc.get("output", {}).pop("directory", None)
    if amplitude is not None:
        if doc.get("initial", {}).get("kind", "mode") == "modal":
            raise ConfigurationError(
                "sweep.amplitude requires a named initial shape, not initial.kind = 'modal'"
            )
        doc.setdefault("initial", {})["amplitude"] = amplitude
    return parse_config(doc)


def _sweep_one(
    echo: dict, q: float, p: float, amplitude: Optional[float], run_dir: str, seed: int
) -> dict:
    try:
        rc = _sweep_variant(echo, q, p, amplitude)
        summary, _ = _run_simulation(rc, Path(run_dir), seed)
        return {"status": "ok", "summary": summary}
    except Exception as exc:  # partial failures are recorded, the sweep continues
        return {"status": "error", "error": f"{type(exc).__name__}: {exc}"}


def cmd_sweep(rc: RunConfig, out_dir: Path, seed: int, workers: int) -> int:
    amplitudes = rc.sweep["amplitude"] if rc.sweep["amplitude"] is not None else [None]
    combos = list(itertools.product(rc.sweep["q"], rc.sweep["p"], amplitudes))
    if not combos:
        raise ConfigurationError("sweep grid is empty")
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        (rc.echo, q, p, amp, str(out_dir / f"run_{i:03d}"), seed)
        for i, (q, p, amp) in enumerate(combos)
    ]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_one, *job) for job in jobs]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_sweep_one(*job) for job in jobs]

    phase: Counter = Counter()
    with open(out_dir / "results.jsonl", "w", encoding="utf-8") as fh:
        for i, ((q, p, amp), outcome) in enumerate(zip(combos, outcomes)):
            line = {
                "run": i,
                "dir": f"run_{i:03d}",
                "params": {"q": q, "p": p, "amplitude": amp},
                **outcome,
            }
            fh.write(json.dumps(line, sort_keys=True) + "\n")
            if outcome["status"] == "ok":
                summary = outcome["summary"]
                phase[(summary["classification"]["predicted"], summary["outcome_flag"])] += 1
            else:
                phase[("error", "error")] += 1

    lines = ["predicted                    observed            count"]
    for (pred, obs), count in sorted(phase.items()):
        lines.append(f"{pred:<28} {obs:<19} {count}")
    table = "\n".join(lines)
    (out_dir / "phase_table.txt").write_text(table + "\n")
    print(table)
    return 0


_DISPATCH = {
    "constants": cmd_constants,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wavewell",
        description="Potential-well simulation laboratory for a damped log-source wave equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("constants", "compute and emit the well-geometry constants"),
        ("simulate", "integrate one configured run and write its artifacts"),
        ("classify", "classify the configured initial data without integrating"),
        ("sweep", "run a (q, p, amplitude) grid of simulations"),
        ("fit", "re-fit decay laws to an existing trajectory.csv"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="path to a JSON run config")
        sp.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        sp.add_argument("--seed", type=int, default=None, help="seed (overrides output.seed)")
        sp.add_argument("--workers", type=int, default=1, help="parallel workers for sweep")

    args = parser.parse_args(argv)
    try:
        rc = load_config(args.config)
        seed = args.seed if args.seed is not None else rc.output.seed
        out_dir = _resolve_out(rc, args.out, args.command)
        return _DISPATCH[args.command](rc, out_dir, seed, max(1, args.workers))
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
