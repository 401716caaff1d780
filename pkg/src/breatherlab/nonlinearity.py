"""Cubic source of the offset equation and its scaling checks.

With ``u = e^{it}(1 + w)`` the focusing cubic NLS becomes

    i w_t + w_xx + 2 Re w = G[w],   G[w] = -(2|w|^2 + w^2 + |w|^2 w).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid1D, PerturbationField, random_bandlimited


@dataclass(frozen=True)
class SourceField:
    grid: Grid1D
    samples: np.ndarray

    @property
    def f(self) -> np.ndarray:
        return self.samples.real

    @property
    def g(self) -> np.ndarray:
        return self.samples.imag


def G_pointwise(w):
    a2 = w.real * w.real + w.imag * w.imag
    return -(2.0 * a2 + w * w + a2 * w)


def G_background_form(w):
    """The same polynomial written around the unit background."""
    one_w = 1.0 + w
    return -(np.abs(one_w) ** 2 - 1.0) * one_w + 2.0 * w.real


def evaluate_G(w: PerturbationField, dealias: bool = True) -> SourceField:
    grid = w.grid
    G = G_pointwise(w.samples)
    if dealias:
        c = np.fft.fft(G)
        c[~grid.dealias_mask] = 0.0
        G = np.fft.ifft(c)
    return SourceField(grid, G)


def _hs(grid, samples, s):
    return grid.hs_norm(samples, s)


@dataclass
class OrderReport:
    eps: np.ndarray
    norms: np.ndarray
    ratios: np.ndarray
    slope: float
    limit: float
    variation: float
    passed: bool


def quadratic_order_check(
    w: PerturbationField,
    s: float = 1.0,
    eps=(1e-1, 1e-2, 1e-3, 1e-4),
    tol: float = 0.05,
) -> OrderReport:
    """``|G[eps w]|_{H^s} / eps^2`` must settle as ``eps -> 0``.

    ``w`` is rescaled to unit ``H^s`` norm.  The limit is the norm of the
    quadratic part ``2|w|^2 + w^2``.
    """
    if s <= 0.5:
        raise ValueError("the H^s algebra property needs s > 1/2")
    grid = w.grid
    u = w.samples / grid.hs_norm(w.samples, s)
    eps = np.asarray(eps, dtype=float)
    norms = np.array([
        _hs(grid, evaluate_G(PerturbationField(grid, e * u)).samples, s) for e in eps
    ])
    ratios = norms / eps**2
    slope = float(np.polyfit(np.log(eps), np.log(norms), 1)[0])
    quad = np.fft.fft(2.0 * np.abs(u) ** 2 + u * u)
    quad[~grid.dealias_mask] = 0.0
    limit = _hs(grid, np.fft.ifft(quad), s)
    order = np.argsort(eps)
    variation = float(abs(ratios[order[0]] - ratios[order[1]]) / ratios[order[0]])
    passed = bool(np.all(np.isfinite(ratios)) and variation < tol)
    return OrderReport(eps, norms, ratios, slope, float(limit), variation, passed)


@dataclass
class LipschitzReport:
    M: np.ndarray
    max_raw: np.ndarray          # max |G1 - G2| / |w1 - w2|
    max_normalized: np.ndarray   # divided by (|w1| + |w2| + |w1|^2 + |w2|^2)
    passed: bool = field(default=False)


def lipschitz_check(
    grid: Grid1D,
    M=(0.025, 0.05, 0.1, 0.2),
    pairs: int = 100,
    s: float = 1.0,
    seed: int = 0,
    cutoff: float = 4.0,
) -> LipschitzReport:
    """Monte-Carlo Lipschitz ratios of ``G`` on the ``H^s`` ball of radius ``M``.

    The same random directions are reused for every radius so that the
    envelope in ``M`` is comparable across radii.
    """
    rng = np.random.default_rng(seed)
    dirs = []
    for _ in range(pairs):
        a = random_bandlimited(grid, rng, cutoff, s).samples
        b = random_bandlimited(grid, rng, cutoff, s).samples
        ra, rb = rng.uniform(0.1, 1.0, size=2)
        dirs.append((ra * a, rb * b))
    M = np.asarray(M, dtype=float)
    raw = np.zeros(M.size)
    norm = np.zeros(M.size)
    for i, m in enumerate(M):
        for a, b in dirs:
            w1, w2 = m * a, m * b
            n1, n2 = grid.hs_norm(w1, s), grid.hs_norm(w2, s)
            d = grid.hs_norm(w1 - w2, s)
            if d == 0:
                continue
            g1 = evaluate_G(PerturbationField(grid, w1)).samples
            g2 = evaluate_G(PerturbationField(grid, w2)).samples
            dg = grid.hs_norm(g1 - g2, s)
            raw[i] = max(raw[i], dg / d)
            norm[i] = max(norm[i], dg / ((n1 + n2 + n1**2 + n2**2) * d))
    passed = bool(np.all(np.isfinite(raw)) and np.all(np.diff(raw) >= 0))
    return LipschitzReport(M, raw, norm, passed)
