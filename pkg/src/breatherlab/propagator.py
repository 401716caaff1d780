"""Exact solution operator of the linearized offset equation.

For the real pair ``(phi_hat, psi_hat)`` at frequency ``xi`` the linear flow is

    d/dt (phi_hat, psi_hat) = A (phi_hat, psi_hat) + (g_hat, -f_hat),
    A = [[0, xi^2], [2 - xi^2, 0]],     A^2 = -mu I,

so ``exp(tau A) = C I + S A`` with the kernels of :mod:`breatherlab.symbols`.
A source ``G = f + i g`` enters through ``J (f_hat, g_hat) = (g_hat, -f_hat)``.

States are arrays of shape ``(2, n)`` (rows ``phi_hat``, ``psi_hat``) over an
arbitrary array of frequencies; source histories have shape ``(nodes, 2, n)``
with rows ``f_hat``, ``g_hat``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .grid import Grid1D, SQRT2
from .symbols import HIGH_BAND_K, kernel_S_integral, kernels, mu_of


@dataclass(frozen=True)
class PropagatorMatrix:
    """Entries of ``M(tau, xi) = [[C, xi^2 S], [(2 - xi^2) S, C]]``."""

    tau: float
    C: np.ndarray
    upper: np.ndarray
    lower: np.ndarray

    @classmethod
    def build(cls, xi: np.ndarray, tau: float) -> PropagatorMatrix:
        xi = np.asarray(xi, dtype=float)
        C, S = kernels(mu_of(xi), tau)
        return cls(float(tau), C, xi * xi * S, (2.0 - xi * xi) * S)

    def apply(self, state: np.ndarray) -> np.ndarray:
        p, q = state[0], state[1]
        return np.stack((self.C * p + self.upper * q, self.lower * p + self.C * q))

    def det(self) -> np.ndarray:
        return self.C * self.C - self.upper * self.lower

    def as_array(self) -> np.ndarray:
        """``(n, 2, 2)`` stack of the per-frequency matrices."""
        m = np.empty(self.C.shape + (2, 2))
        m[..., 0, 0] = self.C
        m[..., 0, 1] = self.upper
        m[..., 1, 0] = self.lower
        m[..., 1, 1] = self.C
        return m


def J(source: np.ndarray) -> np.ndarray:
    """``(f_hat, g_hat) -> (g_hat, -f_hat)`` along the second-to-last axis."""
    return np.stack((source[..., 1, :], -source[..., 0, :]), axis=-2)


class Propagator:
    """Linear group and Duhamel integrals on a fixed frequency array.

    Matrices are cached per ``tau``; the cache is filled on first use and only
    read afterwards.
    """

    def __init__(self, xi: np.ndarray):
        self.xi = np.asarray(xi, dtype=float)
        self._cache: dict[float, PropagatorMatrix] = {}
        self._phi1: dict[float, PropagatorMatrix] = {}

    @classmethod
    def for_grid(cls, grid: Grid1D, real: bool = False) -> Propagator:
        return cls(grid.rxi if real else grid.xi)

    def matrix(self, tau: float) -> PropagatorMatrix:
        tau = float(tau)
        m = self._cache.get(tau)
        if m is None:
            m = PropagatorMatrix.build(self.xi, tau)
            self._cache[tau] = m
        return m

    def integrated_matrix(self, tau: float) -> PropagatorMatrix:
        """``int_0^tau M(u) du``: entries ``S``, ``xi^2 K``, ``(2 - xi^2) K``, ``K = int S``."""
        tau = float(tau)
        m = self._phi1.get(tau)
        if m is None:
            xi2 = self.xi * self.xi
            mu = mu_of(self.xi)
            _, S = kernels(mu, tau)
            K = kernel_S_integral(mu, tau)
            m = PropagatorMatrix(tau, S, xi2 * K, (2.0 - xi2) * K)
            self._phi1[tau] = m
        return m

    def homogeneous_step(self, state: np.ndarray, tau: float) -> np.ndarray:
        return self.matrix(tau).apply(state)

    def duhamel_apply(self, sources: np.ndarray, tau: float) -> np.ndarray:
        """``int_0^tau M(tau - s) J (f_hat, g_hat)(s) ds`` from equispaced nodes.

        Two nodes use the trapezoid rule, more use Simpson.  A source that is
        identical on every node is integrated in closed form.
        """
        sources = np.asarray(sources)
        if sources.ndim != 3 or sources.shape[1] != 2:
            raise ValueError("source history must have shape (nodes, 2, n)")
        n = sources.shape[0]
        if n < 2:
            raise ValueError("Duhamel quadrature needs at least 2 nodes")
        if sources.shape[2] != self.xi.shape[0]:
            raise ValueError("source history does not match the frequency array")
        if np.array_equal(sources, np.broadcast_to(sources[0], sources.shape)):
            return self.integrated_matrix(tau).apply(J(sources[0]))
        nodes = np.linspace(0.0, tau, n)
        vals = np.stack([self.matrix(tau - s).apply(J(src)) for s, src in zip(nodes, sources)])
        if n == 2:
            return 0.5 * tau * (vals[0] + vals[1])
        return simpson(vals, x=nodes, axis=0)


def homogeneous_step(state: np.ndarray, tau: float, xi: np.ndarray) -> np.ndarray:
    """Apply the linear group for time ``tau`` (negative ``tau`` runs backwards)."""
    return PropagatorMatrix.build(xi, tau).apply(np.asarray(state))


def duhamel_apply(sources: np.ndarray, tau: float, xi: np.ndarray) -> np.ndarray:
    return Propagator(xi).duhamel_apply(sources, tau)


def closed_form_step(phi0, psi0, xi, t):
    """Per-frequency formulas written band by band, as two separate branches.

    Used as an independent cross-check of the unified signed-``mu`` kernels;
    ``xi`` must avoid ``0`` and ``sqrt 2`` exactly.
    """
    xi = np.abs(np.asarray(xi, dtype=float))
    phi0 = np.asarray(phi0)
    psi0 = np.asarray(psi0)
    out_phi = np.empty(np.broadcast(xi, phi0).shape, dtype=np.result_type(phi0, psi0, float))
    out_psi = np.empty_like(out_phi)
    low = xi <= SQRT2
    g = xi[low] * np.sqrt(2.0 - xi[low] ** 2)
    ch, sh = np.cosh(g * t), np.sinh(g * t) / g
    out_phi[low] = ch * phi0[low] + sh * xi[low] ** 2 * psi0[low]
    out_psi[low] = ch * psi0[low] + sh * (2.0 - xi[low] ** 2) * phi0[low]
    hi = ~low
    w = xi[hi] * np.sqrt(xi[hi] ** 2 - 2.0)
    c, s = np.cos(w * t), np.sin(w * t) / w
    out_phi[hi] = c * phi0[hi] + s * xi[hi] ** 2 * psi0[hi]
    out_psi[hi] = c * psi0[hi] + s * (2.0 - xi[hi] ** 2) * phi0[hi]
    return out_phi, out_psi


@dataclass
class GrowthReport:
    t: float
    trials: int
    max_ratio_phi_low: float
    max_ratio_psi_low: float
    max_ratio_phi_high: float
    max_ratio_psi_high: float
    witness: int | None = None

    @property
    def passed(self) -> bool:
        return max(self.max_ratio_phi_low, self.max_ratio_psi_low,
                   self.max_ratio_phi_high, self.max_ratio_psi_high) <= 1.0 + 1e-12


def _band_norm(c: np.ndarray, mask: np.ndarray, weight: np.ndarray, length: float) -> float:
    return float(np.sqrt(np.sum(weight[mask] * np.abs(c[mask]) ** 2) / length))


def verify_corollary_growth(
    t: float,
    trials: int,
    grid: Grid1D | None = None,
    seed: int = 0,
    s: float = 1.0,
    K: float = HIGH_BAND_K,
    data=None,
) -> GrowthReport:
    """Check the homogeneous growth envelopes on random localized data.

    Low band (L2):  ``|Phi| <= cosh t |phi0| + 2 sinh t |psi0|`` and the same
    with ``phi``/``psi`` exchanged.  High band (``H^s`` weight):
    ``|Phi| <= |phi0| + K max(1, t) |psi0|`` and likewise for ``Psi``.
    ``data`` may supply a list of ``(phi0, psi0)`` real sample pairs.
    """
    grid = grid or Grid1D()
    rng = np.random.default_rng(seed)
    prop = Propagator.for_grid(grid)
    low = grid.low_mask
    high = ~low
    w0 = np.ones(grid.points)
    ws = grid.weight(s)
    ratios = np.zeros((4, trials if data is None else len(data)))
    samples = data if data is not None else (
        _random_localized(grid, rng) for _ in range(trials)
    )
    for k, (phi0, psi0) in enumerate(samples):
        state = np.stack((grid.fft(phi0), grid.fft(psi0)))
        out = prop.homogeneous_step(state, t)
        a0 = _band_norm(state[0], low, w0, grid.length)
        b0 = _band_norm(state[1], low, w0, grid.length)
        ratios[0, k] = _band_norm(out[0], low, w0, grid.length) / max(
            np.cosh(t) * a0 + 2 * np.sinh(t) * b0, 1e-300)
        ratios[1, k] = _band_norm(out[1], low, w0, grid.length) / max(
            np.cosh(t) * b0 + 2 * np.sinh(t) * a0, 1e-300)
        a1 = _band_norm(state[0], high, ws, grid.length)
        b1 = _band_norm(state[1], high, ws, grid.length)
        env = K * max(1.0, abs(t))
        ratios[2, k] = _band_norm(out[0], high, ws, grid.length) / max(a1 + env * b1, 1e-300)
        ratios[3, k] = _band_norm(out[1], high, ws, grid.length) / max(b1 + env * a1, 1e-300)
    worst = ratios.max(axis=0)
    witness = int(np.argmax(worst)) if worst.max() > 1 + 1e-12 else None
    m = ratios.max(axis=1)
    return GrowthReport(t, ratios.shape[1], *map(float, m), witness=witness)


def _random_localized(grid: Grid1D, rng: np.random.Generator):
    """Sum of a few random Gaussians, separately for the real and imaginary parts."""
    x = grid.x
    out = []
    for _ in range(2):
        f = np.zeros_like(x)
        for _ in range(rng.integers(1, 5)):
            c = rng.uniform(-grid.length / 8, grid.length / 8)
            width = rng.uniform(0.5, 4.0)
            f += rng.standard_normal() * np.exp(-((x - c) / width) ** 2) * np.cos(
                rng.uniform(0, 3) * x + rng.uniform(0, 2 * np.pi))
        out.append(f)
    return out[0], out[1]
