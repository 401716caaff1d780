"""Scalar kernels of the linearized flow and numerical checks of their bounds.

In Fourier variables the real part of the offset obeys

    phi_tt + mu(xi) phi = 0,    mu(xi) = xi^2 (xi^2 - 2),

so every entry of the solution operator is built from the two fundamental
solutions ``C`` (``C(0) = 1, C'(0) = 0``) and ``S`` (``S(0) = 0, S'(0) = 1``).
For ``mu < 0`` (``|xi| < sqrt 2``) these are ``cosh``/``sinh`` and grow in
time; for ``mu > 0`` they are ``cos``/``sin``.  Both branches are the same
entire function of ``mu t^2``, which is how they are evaluated near
``mu = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SERIES_THRESHOLD = 1e-6
# Provable constant for the high-band bounds |S xi^2| <= K max(1, t):
# |S xi^2| <= min(xi^2 t, |xi| / sqrt(xi^2 - 2)) and the min is at most 1 + sqrt 2.
HIGH_BAND_K = 1.0 + np.sqrt(2.0)


def mu_of(xi):
    """ODE coefficient ``xi^2 (xi^2 - 2)``; minimum -1 at ``|xi| = 1``."""
    xi = np.asarray(xi, dtype=float)
    return xi * xi * (xi * xi - 2.0)


def growth_rate(xi):
    """``|xi| sqrt(2 - xi^2)`` inside the growing band, 0 outside."""
    mu = mu_of(xi)
    return np.sqrt(np.maximum(-mu, 0.0))


def oscillation_frequency(xi):
    """``|xi| sqrt(xi^2 - 2)`` outside the growing band, 0 inside."""
    mu = mu_of(xi)
    return np.sqrt(np.maximum(mu, 0.0))


def _kernels(mu, t, series_threshold=SERIES_THRESHOLD):
    mu, t = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(t, dtype=float))
    z = mu * t * t
    C = np.empty(z.shape)
    S = np.empty(z.shape)
    small = np.abs(z) < series_threshold
    pos = (mu > 0) & ~small
    neg = (mu < 0) & ~small
    r = np.sqrt(np.abs(mu))
    C[pos] = np.cos(r[pos] * t[pos])
    S[pos] = np.sin(r[pos] * t[pos]) / r[pos]
    C[neg] = np.cosh(r[neg] * t[neg])
    S[neg] = np.sinh(r[neg] * t[neg]) / r[neg]
    zs = z[small]
    C[small] = 1.0 - zs / 2.0 + zs**2 / 24.0 - zs**3 / 720.0
    S[small] = t[small] * (1.0 - zs / 6.0 + zs**2 / 120.0 - zs**3 / 5040.0)
    return C, S


def kernel_C(mu, t):
    C, _ = _kernels(mu, t)
    return C if C.ndim else float(C)


def kernel_S(mu, t):
    _, S = _kernels(mu, t)
    return S if S.ndim else float(S)


def kernels(mu, t):
    """Both kernels in one pass (shared square roots)."""
    return _kernels(mu, t)


def kernel_S_integral(mu, t):
    """``int_0^t S(mu, u) du = (1 - C(mu, t)) / mu``, written as ``2 S(mu, t/2)^2``."""
    _, Sh = _kernels(mu, 0.5 * np.asarray(t, dtype=float))
    return 2.0 * Sh * Sh


# --------------------------------------------------------------------------
# bound checks


@dataclass
class BoundRow:
    name: str
    max_ratio: float
    argmax_xi: float
    argmax_t: float
    limit: float = 1.0
    violations: int = 0
    first_violation: tuple[float, float] | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class BoundReport:
    rows: list[BoundRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def __getitem__(self, name: str) -> BoundRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_text(self) -> str:
        lines = ["bound\tmax_ratio\targmax_xi\targmax_t\tviolations"]
        for r in self.rows:
            lines.append(
                f"{r.name}\t{r.max_ratio:.12g}\t{r.argmax_xi:.12g}\t{r.argmax_t:.12g}\t{r.violations}"
            )
        lines.extend(f"# {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


def _row(name, lhs, rhs, XI, T, rtol=1e-12):
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    bad = ~(lhs <= rhs * (1.0 + rtol))
    i = int(np.nanargmax(ratio))
    first = None
    if bad.any():
        k = int(np.flatnonzero(bad.ravel())[0])
        first = (float(XI.ravel()[k]), float(T.ravel()[k]))
    return BoundRow(
        name=name,
        max_ratio=float(ratio.ravel()[i]),
        argmax_xi=float(XI.ravel()[i]),
        argmax_t=float(T.ravel()[i]),
        violations=int(bad.sum()),
        first_violation=first,
    )


def verify_low_band_bounds(t_max: float, samples: int, kernel_funcs=None) -> BoundReport:
    """Check the growing-band bounds on a ``samples x samples`` mesh of
    ``|xi| in [0, sqrt 2]`` and ``t in [0, t_max]``.

    ``C <= cosh t``, ``S <= sinh t``, ``S xi^2 <= 2 sinh t`` and
    ``S (2 - xi^2) <= 2 sinh t``.  The mesh always contains ``xi = 1``, where
    the first two are equalities.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    kC, kS = kernel_funcs or (kernel_C, kernel_S)
    xi = np.union1d(np.linspace(0.0, np.sqrt(2.0), samples), [1.0])
    t = np.linspace(0.0, t_max, samples)
    XI, T = np.meshgrid(xi, t, indexing="ij")
    mu = mu_of(XI)
    C = np.asarray(kC(mu, T))
    S = np.asarray(kS(mu, T))
    report = BoundReport()
    report.rows.append(_row("low_C_le_cosh", C, np.cosh(T), XI, T))
    report.rows.append(_row("low_S_le_sinh", S, np.sinh(T), XI, T))
    report.rows.append(_row("low_S_xi2_le_2sinh", S * XI**2, 2.0 * np.sinh(T), XI, T))
    report.rows.append(_row("low_S_2mxi2_le_2sinh", S * (2.0 - XI**2), 2.0 * np.sinh(T), XI, T))
    # location of sup_xi S(., t) for t > 0
    pos = t > 0
    if pos.any():
        arg = xi[np.argmax(S[:, pos], axis=0)]
        report.notes.append(
            f"argmax_xi S(mu(xi), t) over t>0 lies in [{arg.min():.12g}, {arg.max():.12g}]"
        )
    return report


def verify_high_band_bounds(
    t_max: float,
    samples: int,
    K: float = HIGH_BAND_K,
    xi_max: float = 10.0,
    kernel_funcs=None,
) -> BoundReport:
    """Check ``|C| <= 1``, ``|S xi^2| <= K max(1,t)`` and
    ``|S (2 - xi^2)| <= K max(1,t)`` on a mesh of ``sqrt 2 < |xi| <= xi_max``.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    kC, kS = kernel_funcs or (kernel_C, kernel_S)
    xi = np.linspace(np.sqrt(2.0), xi_max, samples + 1)[1:]
    t = np.linspace(0.0, t_max, samples)
    XI, T = np.meshgrid(xi, t, indexing="ij")
    mu = mu_of(XI)
    C = np.asarray(kC(mu, T))
    S = np.asarray(kS(mu, T))
    env = K * np.maximum(1.0, T)
    report = BoundReport()
    report.rows.append(_row("high_abs_C_le_1", np.abs(C), np.ones_like(C), XI, T))
    report.rows.append(_row("high_S_xi2_le_Kmax1t", np.abs(S * XI**2), env, XI, T))
    report.rows.append(_row("high_S_2mxi2_le_Kmax1t", np.abs(S * (2.0 - XI**2)), env, XI, T))
    report.notes.append(f"K = {K:.12g}")
    return report


def wronskian_defect(mu, t):
    """Relative defect of ``C^2 + mu S^2 = 1``.

    Scaled by ``max(1, C^2, |mu| S^2)``: in the growing band both terms are
    of size ``cosh^2`` and only relative cancellation is meaningful.
    """
    C, S = _kernels(mu, t)
    a = C * C
    b = np.asarray(mu) * S * S
    return np.abs(a + b - 1.0) / np.maximum(1.0, np.maximum(a, np.abs(b)))


def band_edge_check(kernel_funcs=None, t_values=(0.0, 0.5, 1.0, 5.0, 10.0)) -> BoundRow:
    """``S`` must reduce to ``t`` at ``mu = 0`` and be continuous across ``|xi| = sqrt 2``."""
    kC, kS = kernel_funcs or (kernel_C, kernel_S)
    worst = 0.0
    arg = (0.0, 0.0)
    viol = 0
    first = None
    xis = [0.0, np.sqrt(2.0), np.sqrt(2.0) * (1 - 1e-9), np.sqrt(2.0) * (1 + 1e-9)]
    for xi in xis:
        for t in t_values:
            mu = np.asarray([mu_of(xi)], dtype=float)
            S = float(np.asarray(kS(mu, np.asarray([t])))[0])
            C = float(np.asarray(kC(mu, np.asarray([t])))[0])
            # C = 1 - mu t^2/2 + ..., S = t (1 - mu t^2/6 + ...)
            err = max(abs(S - t * (1 - mu[0] * t * t / 6)), abs(C - (1 - mu[0] * t * t / 2)))
            if not np.isfinite(err) or err > 1e-12 * max(1.0, t):
                viol += 1
                first = first or (xi, t)
                err = np.inf if not np.isfinite(err) else err
            if err >= worst:
                worst, arg = err, (xi, t)
    return BoundRow("band_edge_series", worst, arg[0], arg[1], limit=1e-12,
                    violations=viol, first_violation=first)
