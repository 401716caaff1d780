"""Static figures from the CSV outputs (Agg backend, fixed metadata)."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .symbols import growth_rate, oscillation_frequency  # noqa: E402

PLOT_KINDS = ("norms", "growth", "heatmap")
_META = {"Software": None}


def detect_kind(columns) -> str:
    cols = set(columns)
    if {"t", "x", "abs_u"} <= cols:
        return "heatmap"
    if {"k", "fitted", "theory"} <= cols:
        return "growth"
    if {"t", "hs_norm", "linf"} <= cols:
        return "norms"
    raise ValueError(f"CSV columns {sorted(cols)} match no plot kind")


def _require(data, names, kind):
    missing = [n for n in names if n not in data]
    if missing:
        raise ValueError(f"{kind} plot needs columns {missing}")


def _read(path):
    """Columns as float arrays; non-numeric columns (``regime``) stay strings."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], [r for r in rows[1:] if r]
    if not body:
        raise ValueError(f"{path}: CSV has a header but no data")
    out = {}
    for i, name in enumerate(header):
        col = [r[i] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def plot_norms(data: dict, out: Path) -> None:
    _require(data, ("t", "hs_norm", "linf"), "norms")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(data["t"], data["hs_norm"], label="H^s norm")
    ax.semilogy(data["t"], data["linf"], label="sup |w|")
    if "err_vs_exact" in data and np.any(np.isfinite(data["err_vs_exact"])):
        ax.semilogy(data["t"], data["err_vs_exact"], label="distance to exact")
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, metadata=_META)
    plt.close(fig)


def plot_growth(data: dict, out: Path) -> None:
    _require(data, ("k", "fitted", "theory"), "growth")
    kk = np.linspace(1e-3, max(3.0, float(np.max(data["k"])) * 1.05), 600)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(kk, growth_rate(kk), "k-", lw=1, label="|k| sqrt(2 - k^2)")
    ax.plot(kk, oscillation_frequency(kk), "k--", lw=1, label="|k| sqrt(k^2 - 2)")
    ax.plot(data["k"], data["fitted"], "o", label="fitted")
    ax.set_xlabel("k")
    ax.set_ylabel("rate / frequency")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, metadata=_META)
    plt.close(fig)


def plot_heatmap(data: dict, out: Path) -> None:
    _require(data, ("t", "x", "abs_u"), "heatmap")
    ts = np.unique(data["t"])
    xs = np.unique(data["x"])
    if ts.size * xs.size != data["t"].size:
        raise ValueError("heat-map CSV must hold a full (t, x) product grid")
    order = np.lexsort((data["x"], data["t"]))
    Z = data["abs_u"][order].reshape(ts.size, xs.size)
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(xs, ts, Z, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="|u|")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    fig.tight_layout()
    fig.savefig(out, metadata=_META)
    plt.close(fig)


def plot(csv_path: str | Path, out: str | Path, kind: str | None = None) -> Path:
    """Render ``csv_path`` to ``out``; nothing is written if the CSV is unusable."""
    data = _read(csv_path)
    kind = kind or detect_kind(data)
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    out = Path(out)
    {"norms": plot_norms, "growth": plot_growth, "heatmap": plot_heatmap}[kind](data, out)
    return out

