"""Scalar Lagrange multiplier enforcing the discrete energy dissipation law.

After a predictor-corrector step produces the unit-length field m^ and its
multiplier, a single space-independent scalar xi is chosen so that

    E(m^{n+1}) - E^n + dt * D = 0,      m^{n+1} = (m^ + xi) / |m^ + xi|,

where D is the scheme's dissipation target (gamma-weighted, evaluated at m^
for the first-order variant and at the midpoint (m^ + m^n)/2 for the
Crank-Nicolson and Gauss-Seidel variants).  xi is added componentwise and is
an approximation to zero, so the residual F(xi) is solved by a secant
iteration started from xi_0 = -xi_init_scale * dt^2 and xi_1 = 0; a handful
of iterations suffice in practice.

E^n is carried forward from the previous accepted step, so the energy law
telescopes exactly as a sequence identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import schemes
from .errors import SecantConvergenceError
from .fields import VectorField, dissipation, energy, normalize_pointwise
from .grid import helmholtz_solve
from .schemes import Forcing, SchemeState, _advance, generic_corrector

__all__ = [
    "SecantSettings",
    "XiOutcome",
    "apply_xi",
    "residual",
    "secant_solve",
    "energy_step",
]


@dataclass(frozen=True)
class SecantSettings:
    tol: float = 1e-12
    max_iters: int = 50
    xi_init_scale: float = 1.0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError(f"secant tolerance must be positive, got {self.tol}")
        if self.max_iters < 2:
            raise ValueError(f"need at least 2 secant iterations, got {self.max_iters}")


@dataclass(frozen=True)
class XiOutcome:
    xi: float
    iters: int  # residual evaluations
    residual: float
    converged: bool


def apply_xi(m_hat: VectorField, xi: float) -> VectorField:
    """Add the scalar xi to each component, then normalize pointwise."""
    return normalize_pointwise(VectorField(m_hat.grid, m_hat.data + xi))


def residual(
    xi: float,
    m_hat: VectorField,
    prev_energy: float,
    target_dissipation: float,
    dt: float,
) -> float:
    """F(xi) = E((m^+xi)/|m^+xi|) - E^n + dt * D."""
    return energy(apply_xi(m_hat, xi)) - prev_energy + dt * target_dissipation


def secant_solve(
    m_hat: VectorField,
    prev_energy: float,
    target_dissipation: float,
    dt: float,
    settings: SecantSettings = SecantSettings(),
) -> XiOutcome:
    """Secant iteration for F(xi) = 0; reports rather than raises on failure.

    A degenerate denominator (equal residuals) perturbs the newest iterate by
    dt^2 and continues.
    """

    def f(xi: float) -> float:
        return residual(xi, m_hat, prev_energy, target_dissipation, dt)

    x1 = 0.0
    f1 = f(x1)
    evals = 1
    if abs(f1) <= settings.tol:
        return XiOutcome(x1, evals, f1, True)

    x0 = -settings.xi_init_scale * dt * dt
    f0 = f(x0)
    evals += 1
    if abs(f0) <= settings.tol:
        return XiOutcome(x0, evals, f0, True)

    while evals < settings.max_iters:
        if f1 == f0:
            x1 = x1 + dt * dt
            f1 = f(x1)
            evals += 1
            continue
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0 = x1, f1
        x1 = x2
        f1 = f(x1)
        evals += 1
        if abs(f1) <= settings.tol:
            return XiOutcome(x1, evals, f1, True)
    return XiOutcome(x1, evals, f1, False)


def _predict_correct(state: SchemeState, base: str, forcing: Optional[Forcing]):
    """Run the base predictor + corrector; returns (m^, lam^{n+1}, target D)."""
    g, dt, p = state.grid, state.dt, state.params
    mn = state.m_hist[0]

    if base == "bdf1-energy":
        if p.beta != 0.0:
            raise ValueError("bdf1-energy is defined for beta=0")
        lamn_mn = state.lam_hist[0][None] * mn.data
        expl = p.gamma * lamn_mn
        if forcing is not None:
            expl = expl + forcing(state.t + dt).data
        c = p.gamma * dt
        mt = helmholtz_solve(g, mn.data + dt * expl, c)
        m_hat, lam = generic_corrector(1.0, c, VectorField(g, mt - c * lamn_mn))
        target = p.gamma * dissipation(m_hat)
    elif base == "cn-energy":
        if p.beta != 0.0:
            raise ValueError("cn-energy is defined for beta=0")
        mt, lamn_mn, c = schemes._cn_predict(state, False, forcing)
        m_hat, lam = generic_corrector(1.0, c, VectorField(g, mt - c * lamn_mn))
        mid = VectorField(g, 0.5 * (m_hat.data + mn.data))
        target = p.gamma * dissipation(mid)
    elif base == "gauss-seidel-energy":
        mt, lamn_mn, c = schemes._gs_predict(state, forcing)
        m_hat, lam = generic_corrector(1.0, c, VectorField(g, mt - c * lamn_mn))
        mid = VectorField(g, 0.5 * (m_hat.data + mn.data))
        target = p.gamma * dissipation(mid)
    else:
        raise ValueError(f"unknown energy scheme base {base!r}")
    return m_hat, lam, target


def energy_step(
    state: SchemeState,
    base_scheme: str,
    settings: SecantSettings = SecantSettings(),
    forcing: Optional[Forcing] = None,
):
    """Base predictor + corrector, then the energy-preserving third step."""
    m_hat, lam, target = _predict_correct(state, base_scheme, forcing)
    out = secant_solve(m_hat, state.energy, target, state.dt, settings)
    if not out.converged:
        raise SecantConvergenceError(
            f"secant did not converge at t={state.t + state.dt:.6g} "
            f"(dt={state.dt:.3g}, residual={out.residual:.3e} after {out.iters} evaluations)"
        )
    m_new = apply_xi(m_hat, out.xi)
    return _advance(
        state,
        m_new,
        lam,
        xi=out.xi,
        secant_iters=out.iters,
        dissipation_value=target,
        energy_value=energy(m_new),
    )


def _make_energy_step(base: str):
    def step_fn(state, forcing=None, settings=None):
        return energy_step(state, base, settings or SecantSettings(), forcing)

    return step_fn


schemes.register_scheme(
    "bdf1-energy", _make_energy_step("bdf1-energy"), multiplier="type1", history=1, energy_scheme=True
)
schemes.register_scheme(
    "cn-energy", _make_energy_step("cn-energy"), multiplier="type1", history=1, energy_scheme=True
)
schemes.register_scheme(
    "gauss-seidel-energy",
    _make_energy_step("gauss-seidel-energy"),
    multiplier="type1",
    history=2,
    energy_scheme=True,
)
