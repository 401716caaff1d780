"""Closed-form solutions of ``i u_t + u_xx + |u|^2 u = 0`` on the unit background.

Every solution is written as ``u = e^{it} (1 + W)``; ``W`` is what the solver
evolves.  Spatial and temporal shifts act on ``W`` only:
``u(t, x) = e^{it} (1 + W(t - t0, x - x0))``, which is again a solution
because the offset equation is autonomous.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid1D

KINDS = ("stokes", "plane_wave", "peregrine", "kuznetsov_ma", "akhmediev")


@dataclass(frozen=True)
class BreatherSpec:
    kind: str
    a: float | None = None
    c: float = 1.0
    v: float = 0.0
    gamma: float = 0.0
    x0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown breather kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "kuznetsov_ma":
            if self.a is None or not self.a > 0.5:
                raise ValueError("Kuznetsov-Ma breather needs a > 1/2")
        elif self.kind == "akhmediev":
            if self.a is None or not 0.0 < self.a < 0.5:
                raise ValueError("Akhmediev breather needs 0 < a < 1/2")
        elif self.kind == "plane_wave" and not self.c > 0:
            raise ValueError("plane wave needs c > 0")

    @property
    def alpha(self) -> float:
        a = self.a
        if self.kind == "kuznetsov_ma":
            return float(np.sqrt(8.0 * a * (2.0 * a - 1.0)))
        if self.kind == "akhmediev":
            return float(np.sqrt(2.0 * (1.0 - 2.0 * a)))
        raise AttributeError(f"{self.kind} has no alpha")

    @property
    def beta(self) -> float:
        a = self.a
        if self.kind == "kuznetsov_ma":
            return float(np.sqrt(2.0 * (2.0 * a - 1.0)))
        if self.kind == "akhmediev":
            return float(np.sqrt(8.0 * a * (1.0 - 2.0 * a)))
        raise AttributeError(f"{self.kind} has no beta")

    @property
    def period(self) -> float:
        """Time period of the Kuznetsov-Ma offset, ``2 pi / alpha``."""
        if self.kind != "kuznetsov_ma":
            raise AttributeError("only the Kuznetsov-Ma breather is time periodic")
        return 2.0 * np.pi / self.alpha

    @property
    def x_period(self) -> float:
        """Space period of the Akhmediev breather, ``2 pi / alpha``."""
        if self.kind != "akhmediev":
            raise AttributeError("only the Akhmediev breather is space periodic")
        return 2.0 * np.pi / self.alpha

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "x0": self.x0, "t0": self.t0}
        if self.kind in ("kuznetsov_ma", "akhmediev"):
            d["a"] = self.a
        if self.kind == "plane_wave":
            d.update(c=self.c, v=self.v, gamma=self.gamma)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> BreatherSpec:
        d = dict(d)
        kind = d.pop("kind")
        allowed = {"a", "c", "v", "gamma", "x0", "t0"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown breather keys: {sorted(extra)}")
        kw = {k: (None if v is None else float(v)) for k, v in d.items()}
        return cls(kind, **kw)


def _peregrine(t, x):
    return -4.0 * (1.0 + 2.0j * t) / (1.0 + 4.0 * t * t + 2.0 * x * x)


def _kuznetsov_ma(t, x, alpha, beta):
    num = beta * beta * np.cos(alpha * t) + 1j * alpha * np.sin(alpha * t)
    with np.errstate(over="ignore"):
        den = alpha * np.cosh(beta * x) - np.sqrt(2.0) * beta * np.cos(alpha * t)
    return -np.sqrt(2.0) * beta * num / den


def _akhmediev(t, x, a, alpha, beta):
    with np.errstate(over="ignore"):
        ch, sh = np.cosh(beta * t), np.sinh(beta * t)
    num = alpha * alpha * ch + 1j * beta * sh
    den = np.sqrt(2.0 * a) * np.cos(alpha * x) - ch
    return num / den


def _plane_wave(t, x, c, v, gamma):
    phase = (c - 1.0) * t + 0.5 * v * x - 0.25 * v * v * t + gamma
    return np.sqrt(c) * np.exp(1j * phase) - 1.0


@dataclass(frozen=True)
class ExactOffset:
    """``W(t, x)`` with ``u = e^{it}(1 + W)``."""

    spec: BreatherSpec

    def __call__(self, t, x):
        sp = self.spec
        t = np.asarray(t, dtype=float) - sp.t0
        x = np.asarray(x, dtype=float) - sp.x0
        if sp.kind == "stokes":
            return np.zeros(np.broadcast(t, x).shape, dtype=np.complex128)
        if sp.kind == "peregrine":
            return _peregrine(t, x)
        if sp.kind == "kuznetsov_ma":
            return _kuznetsov_ma(t, x, sp.alpha, sp.beta)
        if sp.kind == "akhmediev":
            return _akhmediev(t, x, sp.a, sp.alpha, sp.beta)
        return _plane_wave(t, x, sp.c, sp.v, sp.gamma)

    def on_grid(self, grid: Grid1D, t: float) -> np.ndarray:
        return np.asarray(self(t, grid.x), dtype=np.complex128)


def offset(spec: BreatherSpec) -> ExactOffset:
    return ExactOffset(spec)


def evaluate(spec: BreatherSpec, t, x):
    """Full solution value ``u(t, x)``."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * t) * (1.0 + ExactOffset(spec)(t, x))


def residual(
    spec: BreatherSpec,
    grid: Grid1D,
    t: float,
    h_t: float = 1e-5,
    interior: float | None = None,
) -> float:
    """Max-norm of ``i u_t + u_xx + |u|^2 u`` on the grid.

    ``u_t`` is a centered difference and ``u_xx`` is spectral, so the check
    does not reuse any derivative of the formula being checked.  With
    ``interior`` only points with ``|x| <= interior`` are counted.
    """
    x = grid.x
    up = evaluate(spec, t + h_t, x)
    um = evaluate(spec, t - h_t, x)
    u = evaluate(spec, t, x)
    u_t = (up - um) / (2.0 * h_t)
    u_xx = grid.derivative(u, 2)
    r = np.abs(1j * u_t + u_xx + np.abs(u) ** 2 * u)
    if interior is not None:
        r = r[np.abs(x) <= interior]
    return float(r.max())


@dataclass
class LimitReport:
    km_a: list[float] = field(default_factory=list)
    km_dist: list[float] = field(default_factory=list)
    ab_a: list[float] = field(default_factory=list)
    ab_dist: list[float] = field(default_factory=list)

    @property
    def km_monotone(self) -> bool:
        return bool(np.all(np.diff(self.km_dist[1:]) < 0)) if len(self.km_dist) > 2 else True

    @property
    def ab_monotone(self) -> bool:
        return bool(np.all(np.diff(self.ab_dist[1:]) < 0)) if len(self.ab_dist) > 2 else True


def limit_checks(
    km_a=(0.75, 0.6, 0.55, 0.51, 0.501, 0.5001),
    ab_a=(0.25, 0.4, 0.45, 0.49, 0.499, 0.4999),
    window: float = 1.0,
    n: int = 201,
) -> LimitReport:
    """Sup distance to the Peregrine offset on ``[-window, window]^2`` as ``a -> 1/2``."""
    s = np.linspace(-window, window, n)
    T, X = np.meshgrid(s, s, indexing="ij")
    ref = _peregrine(T, X)
    rep = LimitReport()
    for a in km_a:
        if not a > 0.5:
            raise ValueError("Kuznetsov-Ma sequence must stay above 1/2")
        W = ExactOffset(BreatherSpec("kuznetsov_ma", a=a))(T, X)
        rep.km_a.append(float(a))
        rep.km_dist.append(float(np.max(np.abs(W - ref))))
    for a in ab_a:
        if not 0 < a < 0.5:
            raise ValueError("Akhmediev sequence must stay below 1/2")
        W = ExactOffset(BreatherSpec("akhmediev", a=a))(T, X)
        rep.ab_a.append(float(a))
        rep.ab_dist.append(float(np.max(np.abs(W - ref))))
    return rep
