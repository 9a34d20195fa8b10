"""On-disk formats: the per-step diagnostics CSV, field snapshots, and the
convergence / comparison tables.

Diagnostics CSV columns (exact header)::

    t,energy,dissipation,xi,secant_iters,min_len,max_len,grad_inf,dt,flags

Snapshot layout (little-endian): magic ``LLGF``, u32 format version (1),
u32 nx, u32 ny, f64 lx, f64 ly, f64 t, then the three component arrays as
row-major f64.  Floats in CSVs are written with shortest round-trip ``repr``
so identical runs produce byte-identical files; non-finite errors appear as
``NaN`` and undefined convergence orders as ``-``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fields import RunRecord, VectorField

__all__ = [
    "CSV_HEADER",
    "write_records_csv",
    "read_records_csv",
    "Snapshot",
    "write_snapshot",
    "read_snapshot",
    "write_convergence_csv",
    "read_convergence_csv",
    "write_compare_csv",
    "read_compare_csv",
]

CSV_HEADER = "t,energy,dissipation,xi,secant_iters,min_len,max_len,grad_inf,dt,flags"

SNAPSHOT_MAGIC = b"LLGF"
SNAPSHOT_VERSION = 1
_HEADER_STRUCT = struct.Struct("<4sIII3d")


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    return repr(x)


def write_records_csv(path, records: Iterable[RunRecord]) -> None:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    _fmt(r.t),
                    _fmt(r.energy),
                    _fmt(r.dissipation),
                    _fmt(r.xi),
                    str(int(r.secant_iters)),
                    _fmt(r.min_len),
                    _fmt(r.max_len),
                    _fmt(r.grad_inf),
                    _fmt(r.dt),
                    r.flags,
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_records_csv(path) -> list[RunRecord]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: not a diagnostics CSV (bad header)")
    out = []
    for line in lines[1:]:
        f = line.split(",")
        out.append(
            RunRecord(
                t=float(f[0]),
                energy=float(f[1]),
                dissipation=float(f[2]),
                xi=float(f[3]),
                secant_iters=int(f[4]),
                min_len=float(f[5]),
                max_len=float(f[6]),
                grad_inf=float(f[7]),
                dt=float(f[8]),
                flags=f[9],
            )
        )
    return out


@dataclass(frozen=True)
class Snapshot:
    nx: int
    ny: int
    lx: float
    ly: float
    t: float
    data: np.ndarray  # (3, nx, ny)


def write_snapshot(path, m: VectorField, t: float) -> None:
    g = m.grid
    header = _HEADER_STRUCT.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.nx, g.ny, g.lx, g.ly, float(t))
    body = b"".join(np.ascontiguousarray(m.data[i], dtype="<f8").tobytes() for i in range(3))
    Path(path).write_bytes(header + body)


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER_STRUCT.size:
        raise ValueError(f"{path}: truncated snapshot")
    magic, version, nx, ny, lx, ly, t = _HEADER_STRUCT.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    expected = _HEADER_STRUCT.size + 3 * nx * ny * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER_STRUCT.size).reshape(3, nx, ny)
    return Snapshot(nx=nx, ny=ny, lx=lx, ly=ly, t=t, data=data.astype(np.float64))


def write_convergence_csv(path, rows: Sequence[tuple]) -> None:
    """rows: (dt, error, order-or-None)."""
    lines = ["dt,error,order"]
    for dt, err, order in rows:
        order_s = "-" if order is None or (isinstance(order, float) and math.isnan(order)) else _fmt(order)
        lines.append(f"{_fmt(dt)},{_fmt(err)},{order_s}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_convergence_csv(path) -> list[tuple[float, float, float | None]]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "dt,error,order":
        raise ValueError(f"{path}: not a convergence CSV")
    out = []
    for line in lines[1:]:
        dt_s, err_s, order_s = line.split(",")
        order = None if order_s == "-" else float(order_s)
        out.append((float(dt_s), float(err_s), order))
    return out


def write_compare_csv(path, times: Sequence[float], errors: dict[str, Sequence[float]]) -> None:
    """Error-vs-time table, one column per scheme (NaN for blown-up rows)."""
    names = list(errors)
    lines = ["t," + ",".join(names)]
    for i, t in enumerate(times):
        lines.append(_fmt(t) + "," + ",".join(_fmt(errors[n][i]) for n in names))
    Path(path).write_text("\n".join(lines) + "\n")


def read_compare_csv(path) -> tuple[list[float], dict[str, list[float]]]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    if header[0] != "t":
        raise ValueError(f"{path}: not a comparison CSV")
    names = header[1:]
    times, errors = [], {n: [] for n in names}
    for line in lines[1:]:
        f = line.split(",")
        times.append(float(f[0]))
        for n, v in zip(names, f[1:]):
            errors[n].append(float(v))
    return times, errors
