"""Adaptive time stepping driven by the scalar energy multiplier.

The magnitude |xi| of the energy-enforcing multiplier is the error
indicator.  Each attempt runs one full energy step; if the indicator exceeds
the tolerance, the step size shrinks through

    A_dp(e, dt) = rho * sqrt(tol / e) * dt,     rho = 0.95,

clamped to [dt_min, dt_max], and the same step is retried from the last
accepted state.  Accepted steps update the next step size with the same
formula (an indicator of exactly zero grows straight to dt_max).  A step that
still violates the tolerance at dt_min is accepted with a "dtmin" flag so a
run always terminates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .energy_fix import SecantSettings
from .errors import SecantConvergenceError
from .fields import RunRecord, VectorField, dissipation, normalize_pointwise
from .schemes import Forcing, SchemeState, is_energy_scheme, step

__all__ = ["AdaptiveSettings", "adapt_dt", "adaptive_run"]


@dataclass(frozen=True)
class AdaptiveSettings:
    tol: float = 5e-5
    dt_min: float = 1e-6
    dt_max: float = 1e-2
    rho: float = 0.95

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError(f"indicator tolerance must be positive, got {self.tol}")
        if not (0 < self.dt_min <= self.dt_max):
            raise ValueError(f"need 0 < dt_min <= dt_max, got [{self.dt_min}, {self.dt_max}]")
        if not (0 < self.rho < 1):
            raise ValueError(f"safety factor must lie in (0, 1), got {self.rho}")


def adapt_dt(e: float, dt: float, s: AdaptiveSettings) -> float:
    """Clamped step-size update; a vanishing indicator grows to the ceiling."""
    if e <= 0:
        return s.dt_max
    return float(np.clip(s.rho * np.sqrt(s.tol / e) * dt, s.dt_min, s.dt_max))


def _with_dt(state: SchemeState, dt_new: float) -> SchemeState:
    """Return a copy at the new step size, re-spacing any multistep history.

    Older fields are linearly re-interpolated to t^n - dt_new and
    renormalized pointwise; the CN-based energy scheme carries no extra
    history, so this only matters for the Gauss-Seidel variant.
    """
    if dt_new == state.dt:
        return state
    m_hist = list(state.m_hist)
    lam_hist = list(state.lam_hist)
    if len(m_hist) > 1:
        ratio = dt_new / state.dt
        mn, mp = m_hist[0], m_hist[1]
        interp = VectorField(mn.grid, mn.data + ratio * (mp.data - mn.data))
        m_hist = [mn, normalize_pointwise(interp)] + m_hist[2:]
        if len(lam_hist) > 1:
            lam_hist = [lam_hist[0], lam_hist[0] + ratio * (lam_hist[1] - lam_hist[0])]
    return replace(state, dt=float(dt_new), m_hist=m_hist, lam_hist=lam_hist)


def adaptive_run(
    state: SchemeState,
    scheme_id: str,
    settings: AdaptiveSettings,
    t_end: float,
    *,
    secant: SecantSettings = SecantSettings(),
    forcing: Optional[Forcing] = None,
    include_initial: bool = True,
) -> tuple[list[RunRecord], SchemeState]:
    """Advance to t_end with rejection-and-retry control on |xi|.

    Returns the accepted records (optionally led by a t=0-style row for the
    starting state) and the final state.  The last step is truncated to land
    on t_end.
    """
    if not is_energy_scheme(scheme_id):
        raise ValueError(
            f"adaptive stepping needs an energy-dissipative scheme, got {scheme_id!r}"
        )
    if t_end <= state.t:
        raise ValueError(f"t_end={t_end} is not ahead of t={state.t}")

    records: list[RunRecord] = []
    if include_initial:
        records.append(_initial_record(state))

    eps = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - eps:
        dt_try = min(state.dt, t_end - state.t)
        attempt = _with_dt(state, dt_try)
        try:
            new_state, rec = step(attempt, scheme_id, forcing=forcing, secant=secant)
        except SecantConvergenceError:
            if dt_try <= settings.dt_min * (1 + 1e-12):
                raise
            state = _with_dt(state, max(settings.dt_min, 0.5 * dt_try))
            continue

        e = abs(rec.xi)
        at_floor = dt_try <= settings.dt_min * (1 + 1e-12)
        if e > settings.tol and not at_floor:
            state = _with_dt(state, adapt_dt(e, dt_try, settings))
            continue
        if e > settings.tol:
            rec = replace(rec, flags="dtmin")
        records.append(rec)
        state = _with_dt(new_state, adapt_dt(e, dt_try, settings))
    return records, state


def _initial_record(state: SchemeState) -> RunRecord:
    from .fields import grad_inf, length_deviation

    m0 = state.m_hist[0]
    lo, hi = length_deviation(m0)
    return RunRecord(
        t=state.t,
        energy=state.energy,
        dissipation=state.params.gamma * dissipation(m0),
        xi=0.0,
        secant_iters=0,
        min_len=lo,
        max_len=hi,
        grad_inf=grad_inf(m0),
        dt=0.0,
    )
