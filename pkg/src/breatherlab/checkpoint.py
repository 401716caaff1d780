"""Binary snapshots of an offset field.

Layout: ``b"BLCK"``, a little-endian ``uint32`` header length, a UTF-8 JSON
header ``{L, N, t, s, scheme, version}``, then ``N`` pairs of little-endian
float64 ``(Re w, Im w)``.  Round trips are bit-exact.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .grid import Grid1D, PerturbationField

MAGIC = b"BLCK"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: str | Path, w: PerturbationField, t: float,
                    s: float = 1.0, scheme: str = "picard_duhamel") -> None:
    header = json.dumps({
        "L": w.grid.length, "N": w.grid.points, "t": float(t), "s": float(s),
        "scheme": scheme, "version": VERSION,
    }, sort_keys=True).encode()
    data = np.empty(2 * w.grid.points, dtype="<f8")
    data[0::2] = w.samples.real
    data[1::2] = w.samples.imag
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(data.tobytes())


def load_checkpoint(path: str | Path) -> tuple[PerturbationField, dict]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    (n,) = struct.unpack("<I", raw[4:8])
    try:
        meta = json.loads(raw[8:8 + n].decode())
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointError(f"{path}: corrupt header") from None
    if meta.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported version {meta.get('version')!r}")
    grid = Grid1D(meta["L"], meta["N"])
    body = raw[8 + n:]
    if len(body) != 16 * grid.points:
        raise CheckpointError(f"{path}: expected {grid.points} samples")
    # reinterpret the (Re, Im) pairs in place: arithmetic would lose signed zeros
    w = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return PerturbationField(grid, w), meta
