"""Scalar functionals of the offset field.

For ``u = e^{it}(1 + w)``:

    mass_w     = int |w|^2 + 2 Re w                 (= int |u|^2 - 1)
    energy_w   = int |w_x|^2 - 1/2 int (|w|^2 + 2 Re w)^2
    momentum_w = Im int conj(w) w_x

``energy_w`` is exactly twice ``1/2 int |u_x|^2 - 1/4 int (|u|^2 - 1)^2``.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .grid import Grid1D, PerturbationField, integrate

CSV_HEADER = (
    "t", "mass_w", "energy_w", "momentum_w", "hs_norm", "linf",
    "zero_mode_re", "zero_mode_im", "err_vs_exact", "shift_x0",
)


@dataclass
class DiagnosticsRecord:
    t: float
    mass_w: float
    energy_w: float
    momentum_w: float
    hs_norm: float
    linf: float
    zero_mode_re: float
    zero_mode_im: float
    err_vs_exact: float = float("nan")
    shift_x0: float = float("nan")
    err_l2: float = float("nan")

    def row(self) -> list[float]:
        d = asdict(self)
        return [d[k] for k in CSV_HEADER]


def functionals(samples: np.ndarray, grid: Grid1D) -> tuple[float, float, float]:
    w = samples
    wx = grid.derivative(w, 1)
    dens = w.real**2 + w.imag**2 + 2.0 * w.real
    mass = integrate(dens, grid).real
    energy = integrate(np.abs(wx) ** 2 - 0.5 * dens**2, grid).real
    momentum = integrate(np.conj(w) * wx, grid).imag
    return mass, energy, momentum


def compute_record(
    w: PerturbationField,
    t: float,
    s: float = 1.0,
    exact: Callable | None = None,
) -> DiagnosticsRecord:
    grid = w.grid
    samples = w.samples
    mass, energy, momentum = functionals(samples, grid)
    zero = integrate(samples, grid)
    rec = DiagnosticsRecord(
        t=float(t),
        mass_w=mass,
        energy_w=energy,
        momentum_w=momentum,
        hs_norm=grid.hs_norm(samples, s),
        linf=float(np.max(np.abs(samples))),
        zero_mode_re=zero.real,
        zero_mode_im=zero.imag,
    )
    if exact is not None:
        ref = np.asarray(exact(t, grid.x), dtype=np.complex128)
        dist, x0 = hs_distance_min_shift(samples, ref, grid, s)
        rec.err_vs_exact = dist
        rec.shift_x0 = x0
        rec.err_l2 = grid.hs_norm(samples - ref, 0.0)
    return rec


def _shift(samples: np.ndarray, grid: Grid1D, x0: float) -> np.ndarray:
    """``W(x - x0)`` by spectral interpolation."""
    c = np.fft.fft(samples)
    c[grid.points // 2] = 0.0 if x0 % grid.dx else c[grid.points // 2]
    return np.fft.ifft(c * np.exp(-1j * grid.xi * x0))


def hs_distance_min_shift(
    w: np.ndarray,
    W: np.ndarray,
    grid: Grid1D,
    s: float = 1.0,
    newton_iters: int = 20,
) -> tuple[float, float]:
    """``min_x0 |w - W(. - x0)|_{H^s}`` and the minimizing ``x0``.

    Grid shifts come from one cross-correlation FFT; the best one is refined
    by a parabola through its neighbours and then by Newton steps on the
    trigonometric correlation polynomial.
    """
    w = np.asarray(w, dtype=np.complex128)
    W = np.asarray(W, dtype=np.complex128)
    cw, cW = np.fft.fft(w), np.fft.fft(W)
    a = grid.weight(s) * cw * np.conj(cW)
    corr = np.fft.ifft(a).real
    m = int(np.argmax(corr))
    n = grid.points
    c0, cm, cp = corr[m], corr[(m - 1) % n], corr[(m + 1) % n]
    den = cm - 2.0 * c0 + cp
    frac = 0.5 * (cm - cp) / den if den < 0 else 0.0
    x0 = (m + float(np.clip(frac, -0.5, 0.5))) * grid.dx
    a = a.copy()
    a[n // 2] = 0.0
    xi = grid.xi
    for _ in range(newton_iters):
        e = a * np.exp(1j * xi * x0)
        d1 = np.sum(-xi * e.imag)
        d2 = -np.sum(xi * xi * e.real)
        if not d2 < 0:
            break
        step = float(np.clip(-d1 / d2, -grid.dx, grid.dx))
        x0 += step
        if abs(step) < 1e-15 * grid.length:
            break
    x0 = (x0 + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    dist = grid.hs_norm(w - _shift(W, grid, x0), s)
    return dist, float(x0)


def fit_growth_rate(
    times: np.ndarray,
    values: np.ndarray,
    window: tuple[float, float] = (1e-7, 1e-4),
    kind: str = "growth",
) -> float:
    """Exponential rate of ``|values|`` inside ``window``, or the angular
    frequency of a signed oscillating series (``kind="oscillation"``).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if kind == "growth":
        amp = np.abs(values)
        sel = (amp >= window[0]) & (amp <= window[1])
        if sel.sum() < 2:
            raise ValueError("degenerate fitting window: fewer than 2 samples inside")
        if np.any(amp[sel] <= 0):
            raise ValueError("amplitudes must be positive on the window")
        return float(np.polyfit(times[sel], np.log(amp[sel]), 1)[0])
    if kind == "oscillation":
        sgn = np.signbit(values)
        idx = np.flatnonzero(sgn[1:] != sgn[:-1])
        if idx.size < 2:
            raise ValueError("degenerate window: fewer than 2 zero crossings")
        t0, t1 = times[idx], times[idx + 1]
        v0, v1 = values[idx], values[idx + 1]
        tc = t0 - v0 * (t1 - t0) / (v1 - v0)
        return float(np.pi * (tc.size - 1) / (tc[-1] - tc[0]))
    raise ValueError(f"unknown fit kind {kind!r}")


def whole_line_functionals(offset: Callable, t: float, n: int = 8192, scale: float = 4.0) -> dict:
    """Mass, energy, squared L2 norm and squared gradient norm of ``offset(t, .)`` over the whole line.

    Uses ``x = scale * tan(theta)``: algebraically decaying profiles become
    smooth ``pi``-periodic functions of ``theta``, where the midpoint rule and
    spectral differentiation are exponentially accurate.
    """
    theta = -0.5 * np.pi + (np.arange(n) + 0.5) * np.pi / n
    x = scale * np.tan(theta)
    jac = scale / np.cos(theta) ** 2
    W = np.asarray(offset(t, x), dtype=np.complex128)
    k = np.fft.fftfreq(n, 1.0 / n) * 2.0  # period pi
    dk = np.fft.ifft(1j * k * np.fft.fft(W))
    Wx = dk / jac
    dth = np.pi / n
    dens = np.abs(W) ** 2 + 2.0 * W.real
    return {
        "mass": float(np.sum(dens * jac) * dth),
        "energy": float(np.sum((np.abs(Wx) ** 2 - 0.5 * dens**2) * jac) * dth),
        "l2_squared": float(np.sum(np.abs(W) ** 2 * jac) * dth),
        "grad_squared": float(np.sum(np.abs(Wx) ** 2 * jac) * dth),
        "integral_re": float(np.sum(W.real * jac) * dth),
    }


def write_csv(records: Iterable[DiagnosticsRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for r in records:
            wr.writerow([format(v, ".17g") for v in r.row()])


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        try:
            header = next(rd)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        rows = [list(map(float, r)) for r in rd if r]
    if not rows:
        raise ValueError(f"{path}: CSV has a header but no data")
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


RECORD_FIELDS = tuple(f.name for f in fields(DiagnosticsRecord))
