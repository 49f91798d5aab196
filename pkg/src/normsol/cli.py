"""Command-line front end.

Every command writes ``report.json`` (deterministic for a fixed config and
seed) and ``manifest.json`` (config echo, library version, wall time) into
``--out``, plus CSV tables where the command produces them.

Exit codes: 0 success, 2 configuration or domain error, 3 solver failure,
4 blow-up detected, 5 numerical accuracy error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from . import dynamics as dyn
from . import field as fld
from . import fibering as fib
from . import nonlinearity as nl
from . import scalar_bounds as sb
from . import solver as sol
from . import thresholds as th
from .exceptions import (
    AccuracyError,
    DomainError,
    EvaluationError,
    NormsolError,
    ResolutionError,
    RhoTooLargeError,
    SolverError,
    StepSizeError,
)
from .field import RadialGrid

log = logging.getLogger("normsol")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_BLOWUP = 4
EXIT_ACCURACY = 5

COMMANDS = ("check", "thresholds", "ground", "excited", "fiber", "evolve", "sweep", "bounds")

# grids per command when --n/--rmax/--stretch are not given
GRID_DEFAULTS = {
    # clustered toward the origin so that a collapsing core stays resolved
    "excited": {"n": 2048, "rmax": 6.0, "stretch": 24.0},
    "default": {"n": 4096, "rmax": 40.0, "stretch": 0.0},
}


# time stepping per evolve mode; a collapsing run needs small steps and a tight energy check
OPTIONAL_STEPPING = ("dt", "T", "record", "tol")
STEPPING_DEFAULTS = {
    "evolve": {"dt": 1e-3, "T": 10.0, "record": 10, "tol": 1e-6},
    "stability": {"dt": 2e-3, "T": 50.0, "record": 50, "tol": 1e-6},
    "blowup": {"dt": 5e-6, "T": None, "record": 100, "tol": 1e-8},
}


class ConfigError(DomainError):
    """Malformed configuration, unknown model or missing file."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    model: str = "two-power"
    N: Optional[int] = None
    rho: Optional[float] = None
    n: Optional[int] = None
    rmax: Optional[float] = None
    stretch: Optional[float] = None
    dt: Optional[float] = None
    T: Optional[float] = None
    s: float = 1.0
    eps: Optional[float] = None
    seed: int = 0
    jobs: int = 1
    out: str = "normsol-out"
    field: Optional[str] = None
    smin: float = 1e-3
    smax: float = 1e2
    ns: int = 2001
    rhos: Optional[list] = None
    count: int = 5
    A: Optional[float] = None
    B: Optional[float] = None
    p: Optional[float] = None
    q: Optional[float] = None
    queries: int = 0
    record: Optional[int] = None
    tol: Optional[float] = None
    halvings: int = 200
    skip_guard: bool = False
    csv: bool = False
    width: float = 1.0
    extra: dict = dc_field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose one of {', '.join(COMMANDS)}")
        positive = ["dt", "T", "s", "smin", "smax", "tol", "width"]
        for name in positive:
            value = getattr(self, name)
            if value is None and name in OPTIONAL_STEPPING:
                continue
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ConfigError(f"--{name} must be a positive number, got {value!r}")
        for name in ("rho", "n", "rmax", "eps", "A", "B", "p", "q"):
            value = getattr(self, name)
            if value is not None and not (value > 0 or (name == "eps" and value == 0)):
                raise ConfigError(f"--{name} must be positive, got {value!r}")
        for name in ("jobs", "ns", "count", "record"):
            if getattr(self, name) is not None and getattr(self, name) < 1:
                raise ConfigError(f"--{name} must be at least 1, got {getattr(self, name)!r}")
        if self.stretch is not None and self.stretch < 0:
            raise ConfigError(f"--stretch must be nonnegative, got {self.stretch!r}")
        if self.smin >= self.smax:
            raise ConfigError("--smin must be below --smax")

    def stepping(self, kind: str) -> dict:
        """``dt, T, record, tol`` with defaults for ``kind`` filled in."""
        base = STEPPING_DEFAULTS[kind]
        return {k: getattr(self, k) if getattr(self, k) is not None else v for k, v in base.items()}

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extra"}


def _parse_float_list(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot read list of numbers {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normsol",
        description="Normalized solutions of -Lap u + lambda u = f(u) with prescribed mass.",
    )
    parser.add_argument("command", help=" | ".join(COMMANDS))
    parser.add_argument("--config", help="YAML file with any of the options below")
    parser.add_argument("--model", help="model YAML file, or two-power | logpower | power:<p>")
    parser.add_argument("--N", type=int, help="dimension for built-in models (default 3)")
    parser.add_argument("--rho", type=float, help="mass; default: half the threshold")
    parser.add_argument("--n", type=int, help="number of grid cells")
    parser.add_argument("--rmax", type=float, help="radius of the computational ball")
    parser.add_argument("--stretch", type=float, help="grid clustering toward the origin (0 = uniform)")
    parser.add_argument("--dt", type=float)
    parser.add_argument("--T", type=float)
    parser.add_argument("--s", type=float, help="scaling s * u applied to the input field")
    parser.add_argument("--eps", type=float, help="perturbation size (evolve runs the stability probe)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--out")
    parser.add_argument("--field", help="profile CSV written by ground/excited")
    parser.add_argument("--smin", type=float)
    parser.add_argument("--smax", type=float)
    parser.add_argument("--ns", type=int)
    parser.add_argument("--rhos", help="comma-separated masses for sweep")
    parser.add_argument("--count", type=int, help="number of masses for sweep when --rhos is absent")
    parser.add_argument("--A", type=float)
    parser.add_argument("--B", type=float)
    parser.add_argument("--p", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--queries", type=int, help="random admissible queries for bounds")
    parser.add_argument("--record", type=int, help="steps between trace records")
    parser.add_argument("--tol", type=float, help="energy tolerance for evolve")
    parser.add_argument("--halvings", type=int, help="maximum step halvings in evolve")
    parser.add_argument("--width", type=float, help="Gaussian width used by fiber without --field")
    parser.add_argument("--skip-guard", action="store_true", help="run excited above the M0 guard")
    parser.add_argument("--csv", action="store_true", help="thresholds: also write the g curve")
    return parser


def load_config(argv) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    values: dict = {"command": args.command}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            data = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a mapping of option names to values")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown} in {path}")
        values.update(data)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None or value is False:
            continue
        values[key] = value
    if isinstance(values.get("rhos"), str):
        values["rhos"] = _parse_float_list(values["rhos"])
    if isinstance(values.get("model"), dict):
        values["extra"] = {"model_spec": values.pop("model")}
        values["model"] = "inline"
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# models and fields


def model_from_spec(spec: dict, N: Optional[int] = None) -> nl.NonlinearityModel:
    """Build a model from a mapping such as ``{family: multipower, N: 3, ...}``."""
    if not isinstance(spec, dict):
        raise ConfigError("model description must be a mapping")
    spec = dict(spec.get("model", spec))
    family = spec.pop("family", "multipower")
    dim = int(spec.pop("N", N or 3))
    if family == "multipower":
        return nl.make_multipower(
            nl.MultiPowerSpec(spec.get("subcritical", ()), spec.get("supercritical", ())), dim
        )
    if family == "power":
        p = spec.get("exponent", spec.get("p"))
        if p is None:
            raise ConfigError("power model needs an 'exponent'")
        return nl.pure_power_model(Fraction(str(p)), dim, float(spec.get("coefficient", 1.0)))
    if family == "logpower":
        if dim != 3:
            raise ConfigError("the logarithmic example is defined for N = 3 only")
        return nl.make_logpower_example()
    if family == "tabulated":
        return nl.make_tabulated(spec["t"], spec["F"], dim, odd=bool(spec.get("odd", True)))
    raise ConfigError(f"unknown model family {family!r}")


def resolve_model(cfg: RunConfig) -> nl.NonlinearityModel:
    name = cfg.model
    if name == "inline":
        return model_from_spec(cfg.extra["model_spec"], cfg.N)
    if name == "two-power":
        return nl.two_power_model() if (cfg.N or 3) == 3 else _two_power_in(cfg.N)
    if name == "logpower":
        return model_from_spec({"family": "logpower"}, cfg.N)
    if name.startswith("power:"):
        return model_from_spec({"family": "power", "exponent": name.split(":", 1)[1]}, cfg.N)
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"model file {path} does not exist (built-ins: two-power, logpower, power:<p>)")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"model file {path} is not valid YAML: {exc}") from exc
    return model_from_spec(data, cfg.N)


def _two_power_in(N):
    # one exponent in the middle of each side of 2_#
    sharp, star = nl.critical_exponents(N)
    return nl.two_power_model((2 + sharp) / 2, (sharp + star) / 2, N)


def make_grid(cfg: RunConfig, model) -> RadialGrid:
    base = GRID_DEFAULTS.get(cfg.command, GRID_DEFAULTS["default"])
    return RadialGrid(
        N=model.N,
        r_max=cfg.rmax if cfg.rmax is not None else base["rmax"],
        n=cfg.n if cfg.n is not None else base["n"],
        stretch=cfg.stretch if cfg.stretch is not None else base["stretch"],
    )


def default_rho(model, cfg: RunConfig) -> float:
    if cfg.rho is not None:
        return cfg.rho
    geo = th.geometry_report(model, 1.0)
    return 0.5 * geo.rho_max


def write_profile(path: Path, u: fld.RadialField, extra: Optional[dict] = None) -> None:
    grid = u.grid
    header = {"N": grid.N, "r_max": grid.r_max, "n": grid.n, "stretch": grid.stretch, **(extra or {})}
    with path.open("w", newline="") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        w = csv.writer(fh)
        vals = np.asarray(u.values)
        if np.iscomplexobj(vals):
            w.writerow(["r", "re", "im"])
            for r, v in zip(grid.r, vals):
                w.writerow([repr(float(r)), repr(float(v.real)), repr(float(v.imag))])
        else:
            w.writerow(["r", "u"])
            for r, v in zip(grid.r, vals):
                w.writerow([repr(float(r)), repr(float(v))])


def read_profile(path) -> tuple:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"field file {path} does not exist")
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ConfigError(f"field file {path} lacks the '# {{grid}}' header line")
    try:
        header = json.loads(lines[0][1:])
        grid = RadialGrid(
            N=int(header["N"]), r_max=float(header["r_max"]), n=int(header["n"]),
            stretch=float(header.get("stretch", 0.0)),
        )
        rows = list(csv.reader(lines[1:]))
        cols = rows[0]
        data = np.array([[float(x) for x in row] for row in rows[1:]])
    except (ValueError, KeyError, IndexError) as exc:
        raise ConfigError(f"field file {path} is malformed: {exc}") from exc
    if data.shape[0] != grid.n:
        raise ConfigError(f"field file {path} has {data.shape[0]} rows, header says n={grid.n}")
    vals = data[:, 1] + 1j * data[:, 2] if cols == ["r", "re", "im"] else data[:, 1]
    return grid.field(vals), header


def write_csv(path: Path, rows: list, columns: Optional[list] = None) -> None:
    columns = columns or (list(rows[0]) if rows else [])
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k) for k in columns})


def _clean(obj):
    """Make ``obj`` JSON-serialisable with deterministic number formatting."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):
        return obj.value
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# commands


def strictly_decreasing(u) -> bool:
    """Decreasing up to round-off; cells near the origin on clustered grids differ by less than an ulp."""
    return bool(np.all(np.diff(u) <= 4 * np.finfo(float).eps * np.abs(u[:-1])) and u[-1] < u[0])


def _solution_checks(kind, res, geo, ground_energy=None) -> dict:
    u = res.field.values.real
    if kind == "ground":
        checks = {
            "th:locmin:energy_negative": res.energy < 0,
            "th:locmin:lambda_positive": res.lam > 0,
            "th:locmin:constant_sign": bool(np.all(u > 0)),
            "th:locmin:inside_well": res.grad_norm < geo.R0,
        }
    else:
        checks = {
            "th:2sol:energy_positive": res.energy > 0,
            "th:2sol:lambda_positive": res.lam > 0,
            "th:2sol:in_Mminus": res.branch == "M-minus",
            "th:2sol:decreasing": strictly_decreasing(u),
        }
        if ground_energy is not None:
            checks["th:2sol:above_ground"] = res.energy > ground_energy
    return checks


def _result_doc(res) -> dict:
    doc = res.summary()
    doc.pop("trajectory", None)
    return doc


def cmd_check(cfg, model, out):
    report = nl.check_assumptions(model)
    g_report = nl.check_G_conditions(model)
    c0 = nl.compute_C0(model)
    return {
        "assumptions": report,
        "G_conditions": g_report,
        "C0": float(c0),
        "tags": ["eq:H", "eq:C0", "H0n", "H2n", "G0-G3"],
    }, EXIT_OK


def cmd_thresholds(cfg, model, out):
    rho = default_rho(model, cfg)
    geo = th.geometry_report(model, rho)
    doc = geo.to_dict()
    if cfg.csv:
        ts = np.geomspace(1e-2 * (geo.R0 or geo.s_max), 10 * geo.s_max, 400)
        rows = [{"t": float(t), "g": th.g_value(geo.C0, geo.S, geo.N, rho, float(t))} for t in ts]
        write_csv(out / "g_curve.csv", rows)
        doc["files"] = ["g_curve.csv"]
    return doc, EXIT_OK


def cmd_ground(cfg, model, out):
    rho = default_rho(model, cfg)
    grid = make_grid(cfg, model)
    geo = th.geometry_report(model, rho)
    res = sol.minimize_local(model, rho, grid)
    write_profile(out / "profile.csv", res.field, {"lambda": res.lam, "rho": rho, "kind": "ground"})
    checks = _solution_checks("ground", res, geo)
    doc = {"result": _result_doc(res), "checks": checks, "tags": sorted(checks), "files": ["profile.csv"]}
    return doc, EXIT_OK if res.converged else EXIT_SOLVER


def cmd_excited(cfg, model, out):
    rho = default_rho(model, cfg)
    guard = None
    if not cfg.skip_guard:
        guard = fib.mempty_guard(model).rho_guard
        if rho > guard:
            raise RhoTooLargeError(
                f"rho={rho:.6g} exceeds the M0-exclusion guard {guard:.6g}; "
                "rerun with --skip-guard to attempt the solve anyway",
                guard=guard,
            )
    grid = make_grid(cfg, model)
    geo = th.geometry_report(model, rho)
    res = sol.minimize_on_Mminus(model, rho, grid)
    ground_energy = None
    try:
        ground_energy = sol.minimize_local(model, rho, RadialGrid(N=model.N)).energy
    except NormsolError as exc:
        log.warning("ground state for comparison failed: %s", exc)
    write_profile(out / "profile.csv", res.field, {"lambda": res.lam, "rho": rho, "kind": "excited"})
    checks = _solution_checks("excited", res, geo, ground_energy)
    doc = {
        "result": _result_doc(res),
        "guard": guard,
        "ground_energy": ground_energy,
        "checks": checks,
        "tags": sorted(checks),
        "files": ["profile.csv"],
    }
    return doc, EXIT_OK if res.converged else EXIT_SOLVER


def _input_field(cfg, model):
    if cfg.field:
        u, header = read_profile(cfg.field)
        if u.grid.N != model.N:
            raise ConfigError(f"field dimension {u.grid.N} differs from model dimension {model.N}")
        return u, header
    rho = default_rho(model, cfg)
    grid = make_grid(cfg, model)
    u = grid.gaussian(cfg.width)
    return u * (rho / fld.mass(u)), {"kind": "gaussian", "width": cfg.width}


def cmd_fiber(cfg, model, out):
    u, header = _input_field(cfg, model)
    u = u.with_values(np.abs(u.values)) if u.is_complex else u
    scan = fib.fiber_scan(model, u, (cfg.smin, cfg.smax), cfg.ns)
    cert = fib.check_J1_J2(scan)
    band = fib.DEAD_BAND * max(scan.grad_norm_sq, 1.0)
    rows = [
        {"s": float(s), "phi": float(p), "dphi": float(d), "d2phi": float(e),
         "classification": "M0" if abs(e * s * s) <= band else ("M-" if e < 0 else "M+")}
        for s, p, d, e in zip(scan.s, scan.phi, scan.dphi, scan.d2phi)
    ]
    write_csv(out / "fiber.csv", rows)
    doc = {
        "input": header,
        "t_u": scan.t_u,
        "local_max": scan.local_max,
        "local_min": scan.local_min,
        "classification": scan.classification,
        "J1J2": asdict(cert),
        "files": ["fiber.csv"],
        "tags": ["eq:phi", "J1", "J2"],
    }
    if model.description.get("family") == "multipower":
        spec = nl.MultiPowerSpec(
            [tuple(t) for t in model.description["subcritical"]],
            [tuple(t) for t in model.description["supercritical"]],
        )
        doc["descartes"] = fib.descartes_certificate(spec, model.N, fib.descartes_norms(spec, u)).to_dict()
        doc["tags"].extend(doc["descartes"].get("tags", []))
    return doc, EXIT_OK


def cmd_evolve(cfg, model, out):
    if cfg.field is None:
        raise ConfigError("evolve needs --field (a profile CSV written by ground or excited)")
    u, header = _input_field(cfg, model)
    base = u.with_values(u.values.real) if not u.is_complex else u
    columns = ["t", "mass", "energy", "gradnorm", "V", "M", "dist"]
    if cfg.eps is not None:
        st = cfg.stepping("stability")
        rho = fld.mass(base)
        geo = th.geometry_report(model, rho)
        rep = dyn.stability_probe(
            model, base, cfg.eps, st["T"], st["dt"], geo.R0, seed=cfg.seed,
            record_every=st["record"], energy_tol=st["tol"],
        )
        write_csv(out / "trace.csv", list(rep.trace.rows()), columns)
        doc = {"probe": "stability", **rep.to_dict(), "files": ["trace.csv"]}
        return doc, EXIT_BLOWUP if rep.trace.blowup else EXIT_OK
    if cfg.s != 1.0 and not u.is_complex:
        st = cfg.stepping("blowup")
        rep = dyn.blowup_probe(
            model, base, cfg.s, st["dt"], record_every=st["record"], energy_tol=st["tol"],
            max_halvings=cfg.halvings,
        )
        write_csv(out / "trace.csv", list(rep.trace.rows()), columns)
        doc = {"probe": "blowup", **rep.to_dict(), "files": ["trace.csv"]}
        return doc, EXIT_BLOWUP if rep.blowup else EXIT_OK
    st = cfg.stepping("evolve")
    psi0 = fld.scale_star(cfg.s, u) if cfg.s != 1.0 else u
    psi0 = psi0.with_values(psi0.values.astype(complex))
    trace = dyn.evolve(
        model, psi0, st["dt"], st["T"], record_every=st["record"],
        reference=None if base.is_complex else base, energy_tol=st["tol"], max_halvings=cfg.halvings,
    )
    write_csv(out / "trace.csv", list(trace.rows()), columns)
    defect = trace.virial_defect()
    doc = {
        "probe": "evolve",
        "trace": trace.summary(),
        "virial_defect": float(defect.max()) if defect.size else None,
        "files": ["trace.csv"],
        "tags": ["eq:time", "le:inst:virial"],
    }
    return doc, EXIT_BLOWUP if trace.blowup else EXIT_OK


def cmd_sweep(cfg, model, out):
    if cfg.rhos:
        rhos = sorted(cfg.rhos)
    else:
        top = default_rho(model, cfg)
        rhos = [top * (k + 1) / cfg.count for k in range(cfg.count)]
    grid = make_grid(cfg, model)
    rows = sol.m_curve(model, rhos, grid, jobs=cfg.jobs)
    table = [asdict(r) for r in rows]
    write_csv(out / "m_curve.csv", table, ["rho", "m", "R0", "lam", "converged", "error"])
    ms = [r.m for r in rows]
    ok = all(m is not None for m in ms)
    doc = {
        "rows": table,
        "non_increasing": bool(ok and all(b <= a + 1e-12 for a, b in zip(ms, ms[1:]))),
        "files": ["m_curve.csv"],
        "tags": ["le:neg", "le:sub", "re:bdda"],
    }
    failed = [r for r in rows if r.error]
    return doc, EXIT_SOLVER if failed else EXIT_OK


def cmd_bounds(cfg, model, out):
    doc: dict = {"tags": ["lem:fromAbove", "lem:fromBelow"]}
    if cfg.A is not None and cfg.B is not None and cfg.p is not None:
        if cfg.q is not None:
            doc["from_below"] = asdict(sb.bound_from_below(cfg.A, cfg.B, cfg.p, cfg.q))
        else:
            doc["from_above"] = asdict(sb.bound_from_above(cfg.A, cfg.B, cfg.p))
    if cfg.queries:
        rng = np.random.default_rng(cfg.seed)
        above = below = 0
        for _ in range(cfg.queries):
            A, B = 10.0 ** rng.uniform(-3, 3, size=2)
            p = rng.uniform(0.05, 1.95)
            above += sb.bound_from_above(A, B, p).holds()
            p2 = rng.uniform(2.05, 5.0)
            q2 = p2 + rng.uniform(0.05, 3.0)
            below += sb.bound_from_below(A, B, p2, q2).holds()
        doc["random"] = {"queries": cfg.queries, "above_held": int(above), "below_held": int(below)}
    if len(doc) == 1:
        raise ConfigError("bounds needs --A --B --p [--q] or --queries K")
    return doc, EXIT_OK


HANDLERS = {
    "check": cmd_check,
    "thresholds": cmd_thresholds,
    "ground": cmd_ground,
    "excited": cmd_excited,
    "fiber": cmd_fiber,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "bounds": cmd_bounds,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (AccuracyError, StepSizeError, ResolutionError, EvaluationError)):
        return EXIT_ACCURACY
    if isinstance(exc, SolverError):
        return EXIT_SOLVER
    return EXIT_CONFIG


def _setup_logging():
    level = os.environ.get("NORMSOL_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def run(argv=None) -> int:
    """Parse ``argv``, dispatch, write artifacts and return the exit status."""
    _setup_logging()
    started = time.time()
    try:
        cfg = load_config(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    except NormsolError as exc:
        print(f"normsol: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    manifest = {"command": cfg.command, "config": cfg.echo(), "version": __version__}
    try:
        out.mkdir(parents=True, exist_ok=True)
        model = resolve_model(cfg)
        manifest["model"] = {"name": model.name, "N": model.N, "digest": model.digest}
        doc, code = HANDLERS[cfg.command](cfg, model, out)
    except NormsolError as exc:
        code = exit_code_for(exc)
        doc = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, RhoTooLargeError) and exc.guard is not None:
            doc["guard"] = exc.guard
        print(f"normsol: {type(exc).__name__}: {exc}", file=sys.stderr)
    except OSError as exc:
        code = EXIT_CONFIG
        doc = {"error": type(exc).__name__, "message": str(exc)}
        print(f"normsol: cannot write to {out}: {exc}", file=sys.stderr)
    doc["exit_code"] = code
    manifest["exit_code"] = code
    manifest["wall_time"] = time.time() - started
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
        (out / "manifest.json").write_text(json.dumps(_clean(manifest), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"normsol: cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
