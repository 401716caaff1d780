"""Canned experiments: plain simulation, dispersion scan, Peregrine and
Kuznetsov-Ma instability runs, and the invariant suite.

Every function here returns plain data; file output lives in
:mod:`breatherlab.cli`.  Sweeps fan out over a process pool and are sorted
before they are returned, so results do not depend on the worker count.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import symbols
from .breathers import BreatherSpec, ExactOffset, residual
from .checkpoint import load_checkpoint
from .config import ExperimentConfig, parse_breather, resolve_path
from .diagnostics import (fit_growth_rate, functionals, hs_distance_min_shift,
                          whole_line_functionals)
from .grid import Grid1D, PerturbationField, random_bandlimited
from .nonlinearity import G_background_form, G_pointwise, lipschitz_check, quadratic_order_check
from .propagator import PropagatorMatrix, verify_corollary_growth
from .solver import SolverConfig, Trajectory, run

PEREGRINE_Q0_L2 = float(np.sqrt(4.0 * np.sqrt(2.0) * np.pi))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BREATHERLAB_WORKERS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# initial data


def single_mode(grid: Grid1D, k: float, amplitude: float = 1e-8, mode: str = "eigen") -> PerturbationField:
    """``cos(k x)`` data.  In the growing band ``mode="eigen"`` picks the
    growing eigenvector ``(phi, psi) ~ (k^2, gamma)`` so the linear flow is a
    pure exponential; otherwise ``phi = amplitude cos(k x)``, ``psi = 0``.
    """
    grid.frequency_index(k)
    c = np.cos(k * grid.x)
    gamma = float(symbols.growth_rate(k))
    if mode == "eigen" and gamma > 0:
        a, b = k * k, gamma
        m = max(a, b)
        return PerturbationField(grid, amplitude * (a / m + 1j * b / m) * c)
    return PerturbationField(grid, amplitude * c + 0j)


def build_initial(d: dict, grid: Grid1D, t: float, seed: int = 0,
                  base: Path | None = None) -> PerturbationField:
    kind = d["type"]
    if kind == "zero":
        return PerturbationField(grid, np.zeros(grid.points, dtype=complex))
    if kind == "breather":
        spec = parse_breather(d, grid)
        scale = float(d.get("scale", 1.0))
        return PerturbationField(grid, scale * ExactOffset(spec).on_grid(grid, t))
    if kind == "single_mode":
        return single_mode(grid, float(d["k"]), float(d.get("amplitude", 1e-8)),
                           d.get("mode", "eigen"))
    if kind == "random":
        rng = np.random.default_rng(int(d.get("seed", seed)))
        w = random_bandlimited(grid, rng, float(d.get("cutoff", 4.0)), 1.0)
        return PerturbationField(grid, float(d.get("amplitude", 1e-2)) * w.samples)
    if kind == "checkpoint":
        w, _ = load_checkpoint(resolve_path(d["path"], base))
        if w.grid != grid:
            raise ValueError("checkpoint grid differs from the configured grid")
        return w
    if kind == "superposition":
        total = np.zeros(grid.points, dtype=complex)
        for c in d["components"]:
            total += build_initial(c, grid, t, seed, base).samples
        return PerturbationField(grid, total)
    raise ValueError(f"unknown initial type {kind!r}")


def reference_for(d: dict, grid: Grid1D) -> ExactOffset | None:
    """Exact offset to compare against, for unscaled breather data."""
    if d.get("type") != "breather" or not d.get("compare", True):
        return None
    if float(d.get("scale", 1.0)) != 1.0:
        return None
    return ExactOffset(parse_breather(d, grid))


def simulate(cfg: ExperimentConfig) -> Trajectory:
    w0 = build_initial(cfg.initial, cfg.grid, cfg.solver.t_start, cfg.seed, cfg.base_dir)
    return run(w0, cfg.solver, exact=reference_for(cfg.initial, cfg.grid))


# --------------------------------------------------------------------------
# dispersion scan


@dataclass
class GrowthRow:
    k: float
    regime: str          # "growth" or "oscillation"
    fitted: float
    theory: float
    abs_error: float


def _growth_one(args) -> GrowthRow:
    k, grid, amplitude, linear, dt, window, t_max = args
    k = abs(float(k))
    if k == 0:
        raise ValueError("k = 0 has no growth rate (the zero mode grows linearly)")
    j = grid.frequency_index(k)
    gamma = float(symbols.growth_rate(k))
    omega = float(symbols.oscillation_frequency(k))
    if gamma > 0:
        regime, theory = "growth", gamma
        horizon = min(t_max, np.log(10.0 * window[1] / amplitude) / gamma)
    else:
        regime, theory = "oscillation", omega
        horizon = min(t_max, 10.0 * 2.0 * np.pi / max(omega, 1e-12))
    steps = max(2, int(np.ceil(horizon / dt)))
    cfg = SolverConfig(dt=dt, t_start=0.0, t_end=steps * dt, snapshot_every=dt, linear=linear)
    times, vals = [], []

    def grab(t, w):
        times.append(t)
        vals.append(2.0 * grid.fft(w.phi)[j].real / grid.length)

    run(single_mode(grid, k, amplitude), cfg, store_fields=False, callback=grab)
    fitted = fit_growth_rate(np.array(times), np.array(vals), window, regime)
    return GrowthRow(k, regime, fitted, theory, abs(fitted - theory))


def growth_scan(
    ks: Iterable[float],
    grid: Grid1D | None = None,
    amplitude: float = 1e-8,
    linear: bool = True,
    dt: float = 0.005,
    window: tuple[float, float] = (1e-7, 1e-4),
    t_max: float = 200.0,
    workers: int = 1,
) -> list[GrowthRow]:
    """Fitted rate (``|k| < sqrt 2``) or frequency (``|k| > sqrt 2``) per ``k``.

    The default grid has ``L = 20 pi`` so every multiple of ``0.1`` is a grid
    wavenumber.
    """
    grid = grid or Grid1D(20.0 * np.pi, 256)
    ks = sorted(float(k) for k in ks)
    for k in ks:
        grid.frequency_index(abs(k))
    rows = parallel_map(_growth_one, [(k, grid, amplitude, linear, dt, tuple(window), t_max)
                                      for k in ks], workers)
    return sorted(rows, key=lambda r: r.k)


# --------------------------------------------------------------------------
# Peregrine instability


def peregrine_norm_theory(t: float) -> float:
    """``|Q(t)|_{L2} = (4 sqrt2 pi)^{1/2} (1 + 4 t^2)^{-1/4}``."""
    return PEREGRINE_Q0_L2 * (1.0 + 4.0 * t * t) ** -0.25


@dataclass
class PeregrineRow:
    T: float
    start: float
    shortcut: bool
    L: float
    N: int
    initial_l2: float
    initial_l2_theory: float
    initial_h1: float
    final_dist_q0: float
    final_shift: float
    final_dist_zero: float
    final_l2: float
    final_l2_rel_error: float
    q0_l2_theory: float = PEREGRINE_Q0_L2


def _peregrine_one(args) -> PeregrineRow:
    T, grid, solver, window, full_max = args
    T = float(T)
    shortcut = T > full_max
    start = -min(T, window) if shortcut else -T
    Q = ExactOffset(BreatherSpec("peregrine"))
    wl = whole_line_functionals(Q, -T)
    cfg = SolverConfig(**{**asdict(solver), "t_start": start, "t_end": 0.0})
    # keep dt while landing exactly on t = 0
    steps = max(1, int(round(-start / solver.dt)))
    cfg = SolverConfig(**{**asdict(cfg), "dt": -start / steps})
    traj = run(PerturbationField(grid, Q.on_grid(grid, start)), cfg, store_fields=False)
    w = traj.final.samples
    ref = Q.on_grid(grid, 0.0)
    dist, x0 = hs_distance_min_shift(w, ref, grid, solver.s)
    l2 = grid.hs_norm(w, 0.0)
    return PeregrineRow(
        T=T, start=start, shortcut=shortcut, L=grid.length, N=grid.points,
        initial_l2=float(np.sqrt(wl["l2_squared"])),
        initial_l2_theory=peregrine_norm_theory(T),
        initial_h1=float(np.sqrt(wl["l2_squared"] + wl["grad_squared"])),
        final_dist_q0=dist, final_shift=x0,
        final_dist_zero=grid.hs_norm(w, solver.s),
        final_l2=l2,
        final_l2_rel_error=grid.hs_norm(w - ref, 0.0) / grid.hs_norm(ref, 0.0),
    )


def peregrine_instability(
    Ts: Iterable[float],
    full_grid: Grid1D | None = None,
    window_grid: Grid1D | None = None,
    solver: SolverConfig | None = None,
    window: float = 3.0,
    full_max: float = 10.0,
    workers: int = 1,
) -> list[PeregrineRow]:
    """Start from ``Q(-T)`` and integrate to ``t = 0``.

    For ``T > full_max`` only the final window ``[-window, 0]`` is integrated,
    from exact data; the initial norms are whole-line values of ``Q(-T)``.
    The box must be wide because ``Q`` decays only like ``1/x^2``.
    """
    full_grid = full_grid or Grid1D(1280.0, 16384)
    window_grid = window_grid or Grid1D(640.0, 8192)
    solver = solver or SolverConfig()
    items = [(T, window_grid if T > full_max else full_grid, solver, window, full_max)
             for T in sorted(float(T) for T in Ts)]
    rows = parallel_map(_peregrine_one, items, workers)
    return sorted(rows, key=lambda r: r.T)


# --------------------------------------------------------------------------
# Kuznetsov-Ma instability


@dataclass
class KMInstabilityReport:
    a: float
    period: float
    times: np.ndarray
    separation: np.ndarray
    initial_separation: float
    ratio_final: float
    ratio_max: float
    control_return_error: float
    note: str = ("perturbed datum is KM + a shifted Peregrine offset; "
                 "an approximation of the exact two-breather solution")


def _run_job(args):
    w0, cfg = args
    return run(w0, cfg)


def km_instability(
    a: float = 1.0,
    grid: Grid1D | None = None,
    dt: float = 1e-3,
    perturbation: dict | None = None,
    periods: float = 1.0,
    s: float = 1.0,
    workers: int = 1,
) -> KMInstabilityReport:
    """Separation in ``H^s`` between the KM trajectory and a perturbed one.

    ``perturbation`` keys: ``t0`` (internal Peregrine time at the start,
    default -5), ``x0`` (default ``L/4``), ``scale`` (default 1; 0 disables).
    """
    grid = grid or Grid1D()
    pert = {"t0": -5.0, "x0": grid.length / 4.0, "scale": 1.0, **(perturbation or {})}
    spec = BreatherSpec("kuznetsov_ma", a=a)
    period = spec.period
    horizon = periods * period
    steps = max(1, int(round(horizon / dt)))
    h = horizon / steps
    cfg = SolverConfig(dt=h, t_start=0.0, t_end=steps * h, s=s,
                       snapshot_every=max(h, horizon / 100))
    base = ExactOffset(spec).on_grid(grid, 0.0)
    # Peregrine internal time t0 at solver time 0: Q(t - t0') with t0' = -t0
    Q = ExactOffset(BreatherSpec("peregrine", x0=float(pert["x0"]), t0=-float(pert["t0"])))
    bump = float(pert["scale"]) * Q.on_grid(grid, 0.0)
    w_km = PerturbationField(grid, base)
    w_pt = PerturbationField(grid, base + bump)
    t_km, t_pt = parallel_map(_run_job, [(w_km, cfg), (w_pt, cfg)], workers)
    sep = np.array([grid.hs_norm(p.samples - q.samples, s)
                    for p, q in zip(t_pt.fields, t_km.fields)])
    sep0 = sep[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = sep / sep0 if sep0 > 0 else np.zeros_like(sep)
    ctrl = grid.hs_norm(t_km.final.samples - base, 0.0) / grid.hs_norm(base, 0.0)
    return KMInstabilityReport(
        a=float(a), period=period, times=np.array(t_km.times), separation=sep,
        initial_separation=float(sep0),
        ratio_final=float(ratio[-1]), ratio_max=float(ratio.max()),
        control_return_error=float(ctrl),
    )


# --------------------------------------------------------------------------
# invariant suite


@dataclass
class InvariantResult:
    name: str
    passed: bool
    value: float
    detail: str = ""


@dataclass
class InvariantReport:
    results: list[InvariantResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, name, passed, value, detail=""):
        self.results.append(InvariantResult(name, bool(passed), float(value), detail))

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            tag = "PASS" if r.passed else "FAIL"
            lines.append(f"{tag}\t{r.name}\t{r.value:.6g}\t{r.detail}".rstrip())
        return "\n".join(lines) + "\n"


def check_invariants(seed: int = 0, kernel_funcs=None, samples: int = 200) -> InvariantReport:
    """Kernel identities and bounds, propagator algebra and source scaling.

    ``kernel_funcs`` replaces ``(kernel_C, kernel_S)`` in the kernel checks,
    which is how a faulty kernel is shown to be caught.
    """
    rng = np.random.default_rng(seed)
    rep = InvariantReport()
    kC, kS = kernel_funcs or (symbols.kernel_C, symbols.kernel_S)

    mu = rng.uniform(-1.0, 50.0, 100_000)
    t = rng.uniform(0.0, 10.0, 100_000)
    C, S = np.asarray(kC(mu, t)), np.asarray(kS(mu, t))
    with np.errstate(invalid="ignore"):
        wr = np.abs(C * C + mu * S * S - 1.0) / np.maximum(1.0, np.maximum(C * C, np.abs(mu) * S * S))
    wmax = float(np.nanmax(wr)) if np.all(np.isfinite(wr)) else float("inf")
    rep.add("wronskian_max_rel_defect", wmax <= 1e-12, wmax)

    edge = symbols.band_edge_check(kernel_funcs)
    rep.add("band_edge_series", edge.passed, edge.max_ratio,
            "" if edge.passed else f"first violation at xi={edge.first_violation}")

    low = symbols.verify_low_band_bounds(10.0, samples, kernel_funcs)
    for r in low.rows:
        rep.add(r.name, r.passed, r.max_ratio, f"argmax xi={r.argmax_xi:.6g} t={r.argmax_t:.6g}")
    high = symbols.verify_high_band_bounds(10.0, samples, kernel_funcs=kernel_funcs)
    for r in high.rows:
        rep.add(r.name, r.passed, r.max_ratio, f"K={symbols.HIGH_BAND_K:.6g}")

    xi = rng.uniform(0.0, 6.0, 2000)
    t1, t2 = rng.uniform(-2.0, 2.0, 2)
    m1, m2 = PropagatorMatrix.build(xi, t1), PropagatorMatrix.build(xi, t2)
    m12 = PropagatorMatrix.build(xi, t1 + t2).as_array()
    prod = m1.as_array() @ m2.as_array()
    grp = float(np.max(np.abs(prod - m12)) / max(1.0, np.max(np.abs(m12))))
    rep.add("propagator_group_law", grp <= 1e-10, grp)
    det = float(np.max(np.abs(m1.det() - 1.0) / np.maximum(1.0, m1.C**2)))
    rep.add("propagator_det_one", det <= 1e-12, det)

    g = Grid1D(80.0, 512)
    growth = verify_corollary_growth(3.0, 20, grid=g, seed=seed)
    worst = max(growth.max_ratio_phi_low, growth.max_ratio_psi_low,
                growth.max_ratio_phi_high, growth.max_ratio_psi_high)
    rep.add("corollary_growth_t3", growth.passed, worst)

    w = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
    ident = float(np.max(np.abs(G_pointwise(w) - G_background_form(w))))
    rep.add("source_two_forms_agree", ident <= 1e-12, ident)

    order = quadratic_order_check(random_bandlimited(g, rng, 4.0, 1.0))
    rep.add("source_quadratic_order", order.passed and abs(order.slope - 2) <= 0.02, order.slope)
    lip = lipschitz_check(g, pairs=20, seed=seed)
    rep.add("source_lipschitz_monotone", lip.passed, float(lip.max_raw.max()))

    km = BreatherSpec("kuznetsov_ma", a=1.0)
    res = residual(km, Grid1D(80.0, 2048), 0.3)
    rep.add("km_residual", res <= 1e-6, res)
    return rep


# --------------------------------------------------------------------------
# breather evaluation


def breather_eval(spec: BreatherSpec, grid: Grid1D, t: float) -> dict:
    W = ExactOffset(spec).on_grid(grid, t)
    mass, energy, momentum = functionals(W, grid)
    return {
        "x": grid.x, "W": W, "u": np.exp(1j * t) * (1.0 + W),
        "mass_w": mass, "energy_w": energy, "momentum_w": momentum,
        "residual": residual(spec, grid, t),
    }


# --------------------------------------------------------------------------
# tables


def write_rows(rows: list, path: str | Path) -> None:
    if not rows:
        raise ValueError("nothing to write")
    names = list(asdict(rows[0]))
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(names)
        for r in rows:
            wr.writerow([_fmt(v) for v in asdict(r).values()])


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)
