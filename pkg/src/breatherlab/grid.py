"""Uniform periodic grid, continuum-normalized Fourier transform and Sobolev norms.

The whole line is replaced by the periodic box ``[-L/2, L/2)`` sampled at
``N`` points.  Spectral coefficients are normalized so that

    w_hat(xi_j) ~ integral of w(x) exp(-i xi_j x) dx,

which lets the per-frequency formulas of the linear propagator be used
without any extra factors.  Coefficient arrays are stored in numpy FFT order
(``xi = 2*pi*fftfreq(N, dx)``); the unpaired Nyquist index is ``j = -N/2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class Grid1D:
    """Periodic grid on ``[-L/2, L/2)`` with ``N`` (even) points."""

    length: float = 80.0
    points: int = 2048

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"grid length must be positive, got {self.length}")
        if int(self.points) != self.points or self.points <= 0 or self.points % 2:
            raise ValueError(f"grid points must be a positive even integer, got {self.points}")
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "points", int(self.points))

    @property
    def dx(self) -> float:
        return self.length / self.points

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.points)

    @cached_property
    def index(self) -> np.ndarray:
        """Integer frequency index ``j`` of each coefficient (FFT order)."""
        return np.fft.fftfreq(self.points, 1.0 / self.points).astype(np.int64)

    @cached_property
    def xi(self) -> np.ndarray:
        return self.dxi * self.index

    @cached_property
    def rxi(self) -> np.ndarray:
        """Non-negative frequencies of the real-to-complex transform."""
        return self.dxi * np.arange(self.points // 2 + 1)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(-i xi_j x_0) with x_0 = -L/2 equals (-1)^j
        return np.where(self.index % 2 == 0, 1.0, -1.0)

    @cached_property
    def low_mask(self) -> np.ndarray:
        return np.abs(self.xi) <= SQRT2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask; also removes the unpaired Nyquist coefficient."""
        return np.abs(self.index) <= self.points // 3

    @cached_property
    def rdealias_mask(self) -> np.ndarray:
        return np.arange(self.points // 2 + 1) <= self.points // 3

    def weight(self, s: float) -> np.ndarray:
        """Sobolev weight ``(1 + xi^2)^s`` on the full frequency set."""
        return (1.0 + self.xi**2) ** s

    def rweight(self, s: float) -> np.ndarray:
        return (1.0 + self.rxi**2) ** s

    # array-level helpers used in the hot loops
    def fft(self, samples: np.ndarray) -> np.ndarray:
        return self.dx * self._phase * np.fft.fft(samples)

    def ifft(self, coefficients: np.ndarray) -> np.ndarray:
        return np.fft.ifft(coefficients * self._phase) / self.dx

    def hs_norm(self, samples: np.ndarray, s: float = 1.0) -> float:
        if s < 0:
            raise ValueError("Sobolev index must be non-negative")
        c = np.fft.fft(samples)
        # |phase| = 1, so dx-scaling is the only normalization that matters
        total = np.sum(self.weight(s) * (c.real**2 + c.imag**2))
        return float(np.sqrt(total * self.dx**2 / self.length))

    def derivative(self, samples: np.ndarray, order: int = 1) -> np.ndarray:
        c = np.fft.fft(samples)
        mult = (1j * self.xi) ** order
        if order % 2:
            mult[self.points // 2] = 0.0
        return np.fft.ifft(mult * c)

    def frequency_index(self, k: float, tol: float = 1e-9) -> int:
        """Index ``j`` with ``xi_j == k``; raises if ``k`` is not on the grid."""
        j = k / self.dxi
        jr = int(round(j))
        if abs(j - jr) > tol * max(1.0, abs(j)) or abs(jr) >= self.points // 2:
            nearest = self.dxi * jr
            raise ValueError(
                f"wavenumber {k} is not representable on this grid "
                f"(nearest representable: {nearest:.12g})"
            )
        return jr


@dataclass(frozen=True)
class PerturbationField:
    """Complex offset field ``w = phi + i psi`` sampled on a grid."""

    grid: Grid1D
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} samples, got shape {samples.shape}")
        object.__setattr__(self, "samples", samples)

    @property
    def phi(self) -> np.ndarray:
        return self.samples.real

    @property
    def psi(self) -> np.ndarray:
        return self.samples.imag

    def spectral(self) -> SpectralField:
        return forward_transform(self)


@dataclass(frozen=True)
class SpectralField:
    """Continuum-normalized Fourier coefficients in FFT order."""

    grid: Grid1D
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if coefficients.shape != (self.grid.points,):
            raise ValueError(
                f"expected {self.grid.points} coefficients, got shape {coefficients.shape}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    def physical(self) -> PerturbationField:
        return backward_transform(self)


def forward_transform(field: PerturbationField) -> SpectralField:
    return SpectralField(field.grid, field.grid.fft(field.samples))


def backward_transform(field: SpectralField) -> PerturbationField:
    return PerturbationField(field.grid, field.grid.ifft(field.coefficients))


def hs_norm(field: PerturbationField | SpectralField, s: float) -> float:
    """``H^s`` norm with weight ``(1 + xi^2)^s``; ``s = 0`` is the L2 norm."""
    if s < 0:
        raise ValueError("Sobolev index must be non-negative")
    grid = field.grid
    if isinstance(field, SpectralField):
        c = field.coefficients
        return float(np.sqrt(np.sum(grid.weight(s) * np.abs(c) ** 2) / grid.length))
    return grid.hs_norm(field.samples, s)


def band_masks(grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Index sets of the growing band ``|xi| <= sqrt 2`` and its complement."""
    low = np.flatnonzero(grid.low_mask)
    high = np.flatnonzero(~grid.low_mask)
    return low, high


def integrate(samples: np.ndarray, grid: Grid1D) -> complex:
    """Periodic rectangle rule; spectrally accurate for smooth periodic data."""
    return complex(np.sum(samples) * grid.dx)


def dealias(coefficients: np.ndarray, grid: Grid1D) -> np.ndarray:
    return np.where(grid.dealias_mask, coefficients, 0.0)


def random_bandlimited(
    grid: Grid1D, rng: np.random.Generator, cutoff: float = 4.0, s: float | None = 1.0
) -> PerturbationField:
    """Random smooth complex field with spectrum supported in ``|xi| <= cutoff``.

    Real and imaginary parts are independent real fields.  When ``s`` is given
    the result is scaled to unit ``H^s`` norm.
    """
    mask = np.abs(grid.xi) <= cutoff
    mask[grid.points // 2] = False
    parts = []
    for _ in range(2):
        c = np.zeros(grid.points, dtype=np.complex128)
        n = int(mask.sum())
        c[mask] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c *= np.exp(-0.5 * (grid.xi / max(cutoff, 1e-12)) ** 2)
        parts.append(np.fft.ifft(c).real)
    w = parts[0] + 1j * parts[1]
    if s is not None:
        w = w / grid.hs_norm(w, s)
    return PerturbationField(grid, w)
