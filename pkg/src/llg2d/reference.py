"""Classical RK4 reference integration of the unconstrained evolution.

The right side is m_t = -beta m x lap(m) + gamma (lap(m) + |grad m|^2 m)
(plus any forcing), integrated as a plain ODE system in the spectral spatial
discretization: no projection and no multiplier, so length is conserved only
up to the integrator's own O(dt^4) drift.

High-resolution references are expensive (the experiments use dt down to
1e-6), so results are cached on disk keyed by the run parameters; set
LLG_CACHE_DIR to relocate the cache.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import InstabilityError
from .fields import VectorField, _cross_data
from .grid import Grid2D, gradient, laplacian
from . import io as _io

__all__ = ["llg_rhs", "rk4_reference", "cached_reference", "default_cache_dir"]


def llg_rhs(
    m: VectorField, t: float, beta: float, gamma: float, forcing: Optional[Callable] = None
) -> np.ndarray:
    g = m.grid
    lm = laplacian(g, m.data)
    gx, gy = gradient(g, m.data)
    gns = (gx * gx + gy * gy).sum(axis=0)
    rhs = gamma * (lm + gns[None] * m.data)
    if beta != 0.0:
        rhs = rhs - beta * _cross_data(m.data, lm)
    if forcing is not None:
        rhs = rhs + forcing(t).data
    return rhs


def rk4_reference(
    ic: VectorField,
    dt: float,
    t_end: float,
    beta: float = 0.0,
    gamma: float = 1.0,
    forcing: Optional[Callable] = None,
) -> VectorField:
    """Integrate to t_end with classical RK4 at (approximately) step dt.

    The step count is rounded so the run lands exactly on t_end.  The caller
    is responsible for explicit stability (dt below roughly 2.8 / |k|_max^2
    for the diffusive part).  Non-finite values raise with the offending
    time.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError(f"need positive dt and t_end, got dt={dt}, t_end={t_end}")
    n = max(1, round(t_end / dt))
    h = t_end / n
    g = ic.grid
    m = ic.data.copy()
    t = 0.0
    for i in range(n):
        mv = VectorField(g, m)
        k1 = llg_rhs(mv, t, beta, gamma, forcing)
        k2 = llg_rhs(VectorField(g, m + 0.5 * h * k1), t + 0.5 * h, beta, gamma, forcing)
        k3 = llg_rhs(VectorField(g, m + 0.5 * h * k2), t + 0.5 * h, beta, gamma, forcing)
        k4 = llg_rhs(VectorField(g, m + h * k3), t + h, beta, gamma, forcing)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (i + 1) * h
        if not np.isfinite(m.sum()):
            raise InstabilityError(f"reference integration went non-finite at t={t:.6g}")
    return VectorField(g, m)


def default_cache_dir() -> Path:
    env = os.environ.get("LLG_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "llg2d"


def cached_reference(
    problem_name: str,
    ic: VectorField,
    dt: float,
    t_end: float,
    beta: float = 0.0,
    gamma: float = 1.0,
    forcing: Optional[Callable] = None,
    cache_dir: Optional[Path] = None,
) -> VectorField:
    """rk4_reference with a disk cache keyed by (problem, grid, dt, t_end)."""
    g = ic.grid
    key = (
        f"{problem_name}|nx={g.nx}|ny={g.ny}|lx={g.lx!r}|ly={g.ly!r}|x0={g.x0!r}|y0={g.y0!r}"
        f"|beta={beta!r}|gamma={gamma!r}|dt={dt!r}|t={t_end!r}|v1"
    )
    digest = hashlib.sha256(key.encode()).hexdigest()[:24]
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = cache / f"ref_{digest}.llgf"
    if path.exists():
        snap = _io.read_snapshot(path)
        return VectorField(g, snap.data)
    result = rk4_reference(ic, dt, t_end, beta, gamma, forcing)
    cache.mkdir(parents=True, exist_ok=True)
    _io.write_snapshot(path, result, t_end)
    return result
