"""``breatherlab`` command line.

Exit codes: 0 success, 1 invariant violation, 2 blow-up detected,
3 invalid configuration or input, 4 Picard divergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .breathers import KINDS
from .checkpoint import save_checkpoint
from .config import ConfigError, ExperimentConfig, load, parse_breather, parse_grid
from .diagnostics import write_csv
from .grid import Grid1D
from .solver import BlowupDetected, PicardDivergence, SolverError, Trajectory

EXIT_OK, EXIT_VIOLATION, EXIT_BLOWUP, EXIT_CONFIG, EXIT_PICARD = 0, 1, 2, 3, 4


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_field_csv(traj: Trajectory, path: Path, stride: int) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(("t", "x", "abs_u"))
        x = traj.grid.x[::stride]
        for t, w in zip(traj.times, traj.fields):
            a = np.abs(1.0 + w.samples[::stride])
            for xi, ai in zip(x, a):
                wr.writerow((_fmt(t), _fmt(xi), _fmt(ai)))


def _save_trajectory(cfg: ExperimentConfig, traj: Trajectory, out: Path, status: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(traj.records, out / "trajectory.csv")
    if cfg.output.get("field_csv", False) and traj.fields:
        _write_field_csv(traj, out / "field.csv", int(cfg.output.get("field_stride", 1)))
    if cfg.output.get("checkpoint", True) and traj.fields:
        save_checkpoint(out / "final.chk", traj.fields[-1], traj.times[-1],
                        cfg.solver.s, cfg.solver.scheme)
    summary = {
        "status": status,
        "t_final": traj.times[-1] if traj.times else None,
        "snapshots": len(traj.times),
        "max_picard_iters": max(traj.picard_iters, default=0),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _config(args, experiment: str) -> ExperimentConfig:
    if args.config:
        cfg = load(args.config)
    else:
        cfg = ExperimentConfig(experiment=experiment)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg.seed = args.seed
    try:
        cfg = cfg.with_overrides(linear=True if args.linear else None,
                                 project_mean=True if args.project_mean else None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _workers(args, cfg: ExperimentConfig | None = None) -> int:
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        return args.workers
    if cfg is not None and cfg.workers > 1:
        return cfg.workers
    return ex.default_workers()


def _floats(values, name):
    try:
        return [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected numbers") from None


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    cfg = _config(args, "simulate")
    out = Path(args.out)
    try:
        traj = ex.simulate(cfg)
    except SolverError as exc:
        if exc.trajectory is not None and exc.trajectory.records:
            _save_trajectory(cfg, exc.trajectory, out, type(exc).__name__)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP if isinstance(exc, BlowupDetected) else EXIT_PICARD
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _save_trajectory(cfg, traj, out, "ok")
    print(f"wrote {out / 'trajectory.csv'} ({len(traj.records)} snapshots)")
    return EXIT_OK


def cmd_growth_scan(args) -> int:
    cfg = _config(args, "growth-scan")
    p = cfg.params
    ks = _floats(args.k or p.get("k", [0.3, 0.5, 1.0, 1.2, 1.4, 2.0, 3.0]), "k")
    grid = parse_grid(p["grid"]) if "grid" in p else Grid1D(20.0 * np.pi, 256)
    amp = float(args.amplitude if args.amplitude is not None else p.get("amplitude", 1e-8))
    dt = float(p.get("dt", 0.005))
    window = tuple(_floats(p.get("window", [1e-7, 1e-4]), "window"))
    try:
        rows = ex.growth_scan(ks, grid, amp, cfg.solver.linear, dt, window,
                              workers=_workers(args, cfg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ex.write_rows(rows, out / "growth_scan.csv")
    for r in rows:
        print(f"k={r.k:<6g} {r.regime:<11} fitted={r.fitted:.9f} theory={r.theory:.9f} "
              f"abs_error={r.abs_error:.2e}")
    return EXIT_OK


def cmd_peregrine_instability(args) -> int:
    cfg = _config(args, "peregrine-instability")
    p = cfg.params
    Ts = _floats(args.T or p.get("T", [10, 50, 200]), "T")
    full = parse_grid(p["full_grid"]) if "full_grid" in p else None
    win = parse_grid(p["window_grid"]) if "window_grid" in p else None
    rows = ex.peregrine_instability(
        Ts, full, win, cfg.solver, float(p.get("window", 3.0)),
        float(p.get("full_max", 10.0)), workers=_workers(args, cfg))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ex.write_rows(rows, out / "peregrine_instability.csv")
    for r in rows:
        print(f"T={r.T:<6g} |Q(-T)|_L2={r.initial_l2:.6f} (theory {r.initial_l2_theory:.6f}) "
              f"|w(0)|_L2={r.final_l2:.6f} dist_to_Q(0)={r.final_dist_q0:.2e}"
              + (" [window shortcut]" if r.shortcut else ""))
    return EXIT_OK


def cmd_km_instability(args) -> int:
    cfg = _config(args, "km-instability")
    p = cfg.params
    a = float(args.a if args.a is not None else p.get("a", 1.0))
    if not a > 0.5:
        raise ConfigError("Kuznetsov-Ma parameter must satisfy a > 1/2")
    pert = dict(p.get("perturbation", {}))
    if args.scale is not None:
        pert["scale"] = args.scale
    rep = ex.km_instability(a, cfg.grid, cfg.solver.dt, pert, float(p.get("periods", 1.0)),
                            cfg.solver.s, workers=_workers(args, cfg))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "km_instability.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(("t", "separation", "ratio"))
        s0 = rep.initial_separation
        for t, s in zip(rep.times, rep.separation):
            wr.writerow((_fmt(t), _fmt(s), _fmt(s / s0 if s0 > 0 else 0.0)))
    print(f"a={a:g} period={rep.period:.6f} initial_sep={rep.initial_separation:.3e} "
          f"ratio_final={rep.ratio_final:.4f} ratio_max={rep.ratio_max:.4f} "
          f"control_return_error={rep.control_return_error:.2e}")
    print(f"note: {rep.note}")
    return EXIT_OK


def cmd_check_invariants(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rep = ex.check_invariants(seed)
    text = rep.to_text()
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "invariants.txt").write_text(text)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def cmd_breather_eval(args) -> int:
    d = {"kind": args.kind, "x0": args.x0, "t0": args.t0}
    if args.a is not None:
        d["a"] = args.a
    grid = Grid1D(args.L, args.N)
    spec = parse_breather(d, grid)
    res = ex.breather_eval(spec, grid, args.t)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "breather.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(("x", "re_u", "im_u", "abs_u", "re_w", "im_w"))
        for x, u, w in zip(res["x"], res["u"], res["W"]):
            wr.writerow(tuple(map(_fmt, (x, u.real, u.imag, abs(u), w.real, w.imag))))
    print(f"{spec.kind} t={args.t:g}: mass_w={res['mass_w']:.12g} energy_w={res['energy_w']:.12g} "
          f"momentum_w={res['momentum_w']:.3g} residual={res['residual']:.3e}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot

    try:
        path = plot(args.csv, args.out, args.kind)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {path}")
    return EXIT_OK


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default 2 (= blow-up)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML experiment configuration")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $BREATHERLAB_WORKERS or 1)")
    common.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    common.add_argument("--linear", action="store_true", help="drop the cubic source (G = 0)")
    common.add_argument("--project-mean", action="store_true",
                        help="remove the mean of Re w after every step")

    p = _Parser(prog="breatherlab", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="integrate one configuration")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("growth-scan", parents=[common], help="fit growth rates against theory")
    s.add_argument("--k", nargs="+", help="wavenumbers (must lie on the grid)")
    s.add_argument("--amplitude", type=float)
    s.set_defaults(func=cmd_growth_scan)

    s = sub.add_parser("peregrine-instability", parents=[common],
                       help="small Q(-T) data reaching the O(1) Peregrine peak")
    s.add_argument("--T", nargs="+")
    s.set_defaults(func=cmd_peregrine_instability)

    s = sub.add_parser("km-instability", parents=[common],
                       help="separation of KM and perturbed KM trajectories")
    s.add_argument("--a", type=float)
    s.add_argument("--scale", type=float, help="perturbation scale (0 disables)")
    s.set_defaults(func=cmd_km_instability)

    s = sub.add_parser("check-invariants", parents=[common], help="run the property suite")
    s.set_defaults(func=cmd_check_invariants)

    s = sub.add_parser("breather-eval", parents=[common], help="tabulate an exact solution")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--a", type=float)
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--L", type=float, default=80.0)
    s.add_argument("--N", type=int, default=2048)
    s.set_defaults(func=cmd_breather_eval)

    s = sub.add_parser("plot", help="render a CSV produced by another subcommand")
    s.add_argument("csv")
    s.add_argument("--kind", choices=("norms", "growth", "heatmap"))
    s.add_argument("--out", required=True, help="image file")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowupDetected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except PicardDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PICARD
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
