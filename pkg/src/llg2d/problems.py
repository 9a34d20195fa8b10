"""Benchmark problems: the manufactured solution with its forcing, the two
initial conditions used throughout the experiments, and a small registry that
ties each problem to its natural domain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import VectorField, grad_norm_sq
from .grid import Grid2D, build_grid
from .schemes import (
    SchemeParams,
    SchemeState,
    history_needed,
    initial_state,
    make_state,
    multiplier_kind,
)

__all__ = [
    "ManufacturedSolution",
    "manufactured_forcing",
    "ic_benchmark",
    "ic_smooth",
    "ic_uniform",
    "Problem",
    "PROBLEMS",
    "get_problem",
    "make_grid_for",
    "seeded_manufactured_state",
]


class ManufacturedSolution:
    """Closed-form unit-length solution used for exact-error convergence runs.

    The triple (sin(t+x)cos(t+y), cos(t+x)cos(t+y), sin(t+y)) has unit length
    identically; every derivative the forcing needs is available analytically
    at arbitrary (x, y, t), so no numerical differentiation enters the
    forcing path.
    """

    def components(self, x, y, t: float):
        return (
            np.sin(t + x) * np.cos(t + y),
            np.cos(t + x) * np.cos(t + y),
            np.sin(t + y),
        )

    def time_derivative(self, x, y, t: float):
        return (
            np.cos(t + x) * np.cos(t + y) - np.sin(t + x) * np.sin(t + y),
            -np.sin(t + x) * np.cos(t + y) - np.cos(t + x) * np.sin(t + y),
            np.cos(t + y),
        )

    def laplacian(self, x, y, t: float):
        m1, m2, m3 = self.components(x, y, t)
        return (-2.0 * m1, -2.0 * m2, -m3)

    def gradients(self, x, y, t: float):
        """((d_x m_i), (d_y m_i)) for i = 1..3."""
        dx = (
            np.cos(t + x) * np.cos(t + y),
            -np.sin(t + x) * np.cos(t + y),
            np.zeros_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float)),
        )
        dy = (
            -np.sin(t + x) * np.sin(t + y),
            -np.cos(t + x) * np.sin(t + y),
            np.cos(t + y),
        )
        return dx, dy

    def grad_sq(self, x, y, t: float):
        """|grad m|^2; collapses to 1 + cos^2(t+y)."""
        return 1.0 + np.cos(t + y) ** 2

    def field(self, grid: Grid2D, t: float) -> VectorField:
        return VectorField.from_components(grid, *self.components(grid.X, grid.Y, t))

    def multiplier(self, grid: Grid2D, t: float) -> np.ndarray:
        return np.broadcast_to(self.grad_sq(grid.X, grid.Y, t), grid.shape).copy()

    def forcing(self, grid: Grid2D, t: float, beta: float, gamma: float) -> VectorField:
        """g = m_t + beta m x lap(m) - gamma (lap(m) + |grad m|^2 m).

        The forcing is tangent to m (m.g = 0), so the Type-I multiplier
        identity lam = |grad m|^2 survives the forcing.
        """
        x, y = grid.X, grid.Y
        m = self.components(x, y, t)
        mt = self.time_derivative(x, y, t)
        lm = self.laplacian(x, y, t)
        gs = self.grad_sq(x, y, t)
        # m x lap(m) = m x (-2m + (0,0,m3)) = m3 * (m2, -m1, 0)
        cx, cy, cz = m[2] * m[1], -m[2] * m[0], np.zeros_like(m[0])
        g = tuple(
            mt[i] + beta * c - gamma * (lm[i] + gs * m[i])
            for i, c in enumerate((cx, cy, cz))
        )
        return VectorField.from_components(grid, *g)

    def residual_at(self, x: float, y: float, t: float, beta: float, gamma: float):
        """Forced-equation residual at a point, assembled from independently
        coded pieces (numpy cross, explicit partials) as a guard against slips
        in the closed forms above."""
        m = np.array(self.components(x, y, t))
        mt = np.array(self.time_derivative(x, y, t))
        lm = np.array(self.laplacian(x, y, t))
        dx, dy = self.gradients(x, y, t)
        gs = sum(a * a for a in dx) + sum(a * a for a in dy)
        g = self.forcing_at(x, y, t, beta, gamma)
        rhs = -beta * np.cross(m, lm) + gamma * (lm + gs * m) + g
        return mt - rhs

    def forcing_at(self, x: float, y: float, t: float, beta: float, gamma: float):
        m = np.array(self.components(x, y, t))
        mt = np.array(self.time_derivative(x, y, t))
        lm = np.array(self.laplacian(x, y, t))
        gs = self.grad_sq(x, y, t)
        return mt + beta * np.array([m[2] * m[1], -m[2] * m[0], 0.0]) - gamma * (lm + gs * m)


def manufactured_forcing(grid: Grid2D, t: float, beta: float, gamma: float) -> VectorField:
    return ManufacturedSolution().forcing(grid, t, beta, gamma)


def _require_domain(grid: Grid2D, lx, ly, x0, y0, name: str) -> None:
    ok = (
        abs(grid.lx - lx) < 1e-12 * max(1.0, lx)
        and abs(grid.ly - ly) < 1e-12 * max(1.0, ly)
        and abs(grid.x0 - x0) < 1e-12
        and abs(grid.y0 - y0) < 1e-12
    )
    if not ok:
        raise ValueError(
            f"the {name} initial condition lives on [{x0}, {x0 + lx}) x "
            f"[{y0}, {y0 + ly}), got {grid!r}"
        )


def ic_benchmark(grid: Grid2D) -> VectorField:
    """Bubble-like initial condition on [-1/2, 1/2)^2.

    m = (0,0,-1) for r >= 1/2 and (2 x1 A, 2 x2 A, A^2 - r^2)/(A^2 + r^2)
    inside, with A = (1 - 2r)^4 and r the Euclidean radius.  Unit length by
    construction; C^3 but not smooth across r = 1/2.
    """
    _require_domain(grid, 1.0, 1.0, -0.5, -0.5, "benchmark")
    x, y = grid.X, grid.Y
    r2 = x * x + y * y
    r = np.sqrt(r2)
    a = (1.0 - 2.0 * r) ** 4
    denom = a * a + r2
    inner = r <= 0.5
    m1 = np.where(inner, 2.0 * x * a / denom, 0.0)
    m2 = np.where(inner, 2.0 * y * a / denom, 0.0)
    m3 = np.where(inner, (a * a - r2) / denom, -1.0)
    return VectorField.from_components(grid, m1, m2, m3)


def ic_smooth(grid: Grid2D) -> VectorField:
    """The unit-length initial condition on [0, 2pi)^2 built from
    cos(x)cos(y) and its square-root completion in the third component."""
    _require_domain(grid, 2.0 * np.pi, 2.0 * np.pi, 0.0, 0.0, "smooth-6.2")
    c = np.cos(grid.X) * np.cos(grid.Y)
    m3 = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    return VectorField.from_components(grid, c * np.sin(0.1), c * np.cos(0.1), m3)


def ic_uniform(grid: Grid2D) -> VectorField:
    """Constant equilibrium m = (0, 0, 1)."""
    return VectorField.constant(grid, (0.0, 0.0, 1.0))


@dataclass(frozen=True)
class Problem:
    name: str
    lx: float
    ly: float
    x0: float
    y0: float
    ic: Callable[[Grid2D], VectorField]
    forced: bool = False  # manufactured forcing active


PROBLEMS: dict[str, Problem] = {
    "manufactured": Problem("manufactured", 2 * np.pi, 2 * np.pi, 0.0, 0.0, lambda g: ManufacturedSolution().field(g, 0.0), forced=True),
    "smooth-6.2": Problem("smooth-6.2", 2 * np.pi, 2 * np.pi, 0.0, 0.0, ic_smooth),
    "benchmark": Problem("benchmark", 1.0, 1.0, -0.5, -0.5, ic_benchmark),
    "uniform": Problem("uniform", 2 * np.pi, 2 * np.pi, 0.0, 0.0, ic_uniform),
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ValueError(
            f"unknown initial condition {name!r}; valid ids: {', '.join(sorted(PROBLEMS))}"
        ) from None


def make_grid_for(problem: Problem, nx: int, ny: int | None = None, *, dealias: bool = False) -> Grid2D:
    ny = nx if ny is None else ny
    return build_grid(nx, ny, problem.lx, problem.ly, x0=problem.x0, y0=problem.y0, dealias=dealias)


def seeded_manufactured_state(
    scheme_id: str,
    grid: Grid2D,
    dt: float,
    *,
    beta: float = 0.0,
    gamma: float = 1.0,
    stab: float = 0.0,
    t0: float = 0.0,
) -> SchemeState:
    """Initial state with histories filled from the analytic solution.

    Multistep schemes started from exact history run at full order from the
    first step, which the high-order convergence tables require.  Type-I
    multiplier history is the analytic |grad m|^2; Type-II starts at zero.
    """
    ms = ManufacturedSolution()
    depth = max(history_needed(scheme_id), 1)
    m_hist = [ms.field(grid, t0 - j * dt) for j in range(depth)]
    if multiplier_kind(scheme_id) == "type1":
        lam_hist = [ms.multiplier(grid, t0 - j * dt) for j in range(min(depth, 2))]
    else:
        lam_hist = [np.zeros(grid.shape) for _ in range(min(depth, 2))]
    return make_state(m_hist, lam_hist, t0, dt, SchemeParams(beta, gamma, stab))
