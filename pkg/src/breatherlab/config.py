"""Experiment configuration files (YAML, versioned by ``schema_version``)."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from .breathers import KINDS, BreatherSpec
from .grid import Grid1D
from .solver import SolverConfig

SCHEMA_VERSION = 1
EXPERIMENTS = ("simulate", "growth-scan", "peregrine-instability", "km-instability",
               "check-invariants", "breather-eval")
INITIAL_TYPES = ("zero", "breather", "single_mode", "random", "checkpoint", "superposition")


class ConfigError(ValueError):
    pass


_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
_FLOAT_KEYS = {"dt", "t_start", "t_end", "picard_tol", "s", "blowup_threshold", "snapshot_every"}


def _num(v, key):
    # YAML 1.1 reads "1e-3" (no dot) as a string
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


def _check_keys(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def parse_solver(d: dict | None) -> SolverConfig:
    d = dict(d or {})
    _check_keys(d, _SOLVER_KEYS, "solver")
    for k in _FLOAT_KEYS & set(d):
        d[k] = _num(d[k], f"solver.{k}")
    if "picard_max_iters" in d:
        d["picard_max_iters"] = int(_num(d["picard_max_iters"], "solver.picard_max_iters"))
    try:
        return SolverConfig(**d)
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from None


def parse_grid(d: dict | None) -> Grid1D:
    d = dict(d or {})
    _check_keys(d, {"L", "N"}, "grid")
    try:
        L = _num(d.get("L", 80.0), "grid.L")
        N = _num(d.get("N", 2048), "grid.N")
        if N != int(N):
            raise ValueError("grid.N must be an integer")
        return Grid1D(L, int(N))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_breather(d: dict, grid: Grid1D | None = None) -> BreatherSpec:
    d = {k: v for k, v in d.items() if k not in ("type", "compare", "scale")}
    if d.get("kind") not in KINDS:
        raise ConfigError(f"breather kind must be one of {KINDS}, got {d.get('kind')!r}")
    try:
        spec = BreatherSpec.from_dict(d)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"breather: {exc}") from None
    if spec.kind == "akhmediev" and grid is not None:
        ratio = grid.length / spec.x_period
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
            raise ConfigError(
                f"Akhmediev breather with a = {spec.a} has x-period {spec.x_period:.12g}; "
                f"grid length {grid.length:.12g} is not an integer multiple of it")
    return spec


def validate_initial(d: dict, grid: Grid1D, base: Path | None = None) -> None:
    if not isinstance(d, dict) or d.get("type") not in INITIAL_TYPES:
        raise ConfigError(f"initial.type must be one of {INITIAL_TYPES}")
    kind = d["type"]
    if kind == "breather":
        parse_breather(d, grid)
        if "scale" in d:
            _num(d["scale"], "initial.scale")
    elif kind == "single_mode":
        _check_keys(d, {"type", "k", "amplitude", "mode"}, "initial")
        k = _num(d.get("k"), "initial.k")
        _num(d.get("amplitude", 1e-8), "initial.amplitude")
        try:
            grid.frequency_index(k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if d.get("mode", "eigen") not in ("eigen", "cosine"):
            raise ConfigError("initial.mode must be 'eigen' or 'cosine'")
    elif kind == "random":
        _check_keys(d, {"type", "amplitude", "cutoff", "seed"}, "initial")
    elif kind == "checkpoint":
        _check_keys(d, {"type", "path"}, "initial")
        p = resolve_path(d.get("path"), base)
        if p is None or not p.is_file():
            raise ConfigError(f"checkpoint file not found: {d.get('path')!r}")
    elif kind == "superposition":
        _check_keys(d, {"type", "components"}, "initial")
        comps = d.get("components")
        if not isinstance(comps, list) or not comps:
            raise ConfigError("superposition needs a non-empty components list")
        for c in comps:
            validate_initial(c, grid, base)
    else:
        _check_keys(d, {"type"}, "initial")


def resolve_path(p, base: Path | None) -> Path | None:
    if p is None:
        return None
    p = Path(p)
    return p if p.is_absolute() or base is None else base / p


@dataclass
class ExperimentConfig:
    experiment: str = "simulate"
    grid: Grid1D = field(default_factory=Grid1D)
    solver: SolverConfig = field(default_factory=SolverConfig)
    initial: dict = field(default_factory=lambda: {"type": "zero"})
    output: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    base_dir: Path | None = None

    def with_overrides(self, **solver_kw) -> ExperimentConfig:
        new = copy.copy(self)
        kw = {f.name: getattr(self.solver, f.name) for f in fields(SolverConfig)}
        kw.update({k: v for k, v in solver_kw.items() if v is not None})
        new.solver = SolverConfig(**kw)
        return new


def from_dict(raw: dict, base: Path | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    allowed = {"schema_version", "experiment", "grid", "solver", "initial", "output",
               "params", "seed", "workers"}
    _check_keys(raw, allowed, "config")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    exp = raw.get("experiment", "simulate")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
    grid = parse_grid(raw.get("grid"))
    solver = parse_solver(raw.get("solver"))
    initial = raw.get("initial", {"type": "zero"})
    validate_initial(initial, grid, base)
    output = raw.get("output") or {}
    _check_keys(output, {"field_csv", "field_stride", "checkpoint"}, "output")
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be a mapping")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be a positive integer")
    return ExperimentConfig(exp, grid, solver, initial, output, params, seed, workers, base)


def load(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw: Any = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML ({exc})") from None
    return from_dict(raw, path.parent)
