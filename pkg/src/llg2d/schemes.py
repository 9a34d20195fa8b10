"""Time-stepping schemes for the Landau-Lifshitz(-Gilbert) equation.

Every scheme advances a :class:`SchemeState` by one step of size ``dt`` and
returns the new state together with a :class:`~llg2d.fields.RunRecord` of
diagnostics.  The registered identifiers are:

==================  ============================================================
``splitting``       first-order operator splitting (beta=0, gamma=1); equivalent
                    to Helmholtz solve + pointwise projection
``bdf1/2/3``        Type-I BDF-k predictor-corrector; the multiplier field
                    tracks |grad m|^2
``bdf1/2/3-t2``     Type-II variants carrying an explicit extrapolated
                    |grad m|^2 m term; the multiplier field tracks zero
``cn``              Type-I Crank-Nicolson predictor-corrector
``cn-t2``           Type-II Crank-Nicolson predictor-corrector
``semi-implicit``   plain second-order semi-implicit step, no length control
                    (comparison baseline; expected to go unstable)
``projection-e``    second-order projection scheme with the
                    dt*grad(|grad m|^2).grad(m) correction term and plain
                    normalization (comparison baseline)
``gauss-seidel``    stabilized second-order scheme for beta != 0: the three
                    component solves run sequentially, later components reusing
                    freshly computed half-level values in the precession terms
``llg-bdf2``        Type-II BDF2 comparison variant: the explicit term is
                    |grad m'|^2 m' evaluated at the extrapolated field
                    m' = 2 m^n - m^{n-1}
==================  ============================================================

plus the energy-dissipative variants ``bdf1-energy``, ``cn-energy`` and
``gauss-seidel-energy`` registered by :mod:`llg2d.energy_fix`.

All predictors reduce to constant-coefficient Helmholtz solves; all
correctors share :func:`generic_corrector`, the closed-form pointwise root
that restores |m| = 1 exactly.  The precession term m x lap(m) and any other
explicit-only term is extrapolated at full order k; the multiplier term uses
the (k-1)-point extrapolation because the corrector re-closes it.

Functions here never mutate their input state, so read-only snapshots can be
shared freely between steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .bdf import BDF_TABLES, HALF_STEP_WEIGHTS
from .errors import DegenerateFieldError, InstabilityError
from .fields import (
    RunRecord,
    VectorField,
    _cross_data,
    dissipation,
    grad_norm_sq,
)
from .grid import Grid2D, dealias_product, gradient, helmholtz_solve, laplacian

__all__ = [
    "SchemeParams",
    "SchemeState",
    "make_state",
    "initial_state",
    "scheme_ids",
    "multiplier_kind",
    "history_needed",
    "is_energy_scheme",
    "register_scheme",
    "generic_corrector",
    "splitting_step",
    "predictor_bdf",
    "corrector_bdf",
    "cn_step",
    "semi_implicit_step",
    "projection_e_step",
    "gauss_seidel_predictor",
    "gauss_seidel_step",
    "step",
]

Forcing = Callable[[float], VectorField]

_TINY = 1e-13


@dataclass(frozen=True)
class SchemeParams:
    """Equation parameters: precession beta, damping gamma, stabilization S."""

    beta: float = 0.0
    gamma: float = 1.0
    stab: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.stab < 0:
            raise ValueError(f"stabilization constant must be >= 0, got {self.stab}")


@dataclass
class SchemeState:
    """Solution history (newest first), current time, and step size.

    ``m_hist`` holds up to three accepted magnetization fields, ``lam_hist``
    up to two multiplier fields.  ``energy`` carries the exchange energy of
    ``m_hist[0]`` forward so the discrete energy law telescopes exactly.
    """

    m_hist: list[VectorField]
    lam_hist: list[np.ndarray]
    t: float
    dt: float
    params: SchemeParams
    energy: float

    @property
    def grid(self) -> Grid2D:
        return self.m_hist[0].grid


def make_state(
    m_hist: list[VectorField],
    lam_hist: list[np.ndarray],
    t: float,
    dt: float,
    params: SchemeParams,
    energy_value: float | None = None,
) -> SchemeState:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not m_hist:
        raise ValueError("need at least one magnetization field")
    from .fields import energy as _energy

    e = _energy(m_hist[0]) if energy_value is None else float(energy_value)
    return SchemeState(list(m_hist), list(lam_hist), float(t), float(dt), params, e)


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _SchemeInfo:
    step: Callable
    multiplier: str  # "type1" | "type2" | "none"
    history: int  # fields needed at full order
    energy_scheme: bool = False


_SCHEMES: dict[str, _SchemeInfo] = {}


def register_scheme(scheme_id, step_fn, *, multiplier, history, energy_scheme=False):
    _SCHEMES[scheme_id] = _SchemeInfo(step_fn, multiplier, history, energy_scheme)


def scheme_ids() -> list[str]:
    return sorted(_SCHEMES)


def _info(scheme_id: str) -> _SchemeInfo:
    try:
        return _SCHEMES[scheme_id]
    except KeyError:
        raise ValueError(
            f"unknown scheme {scheme_id!r}; valid ids: {', '.join(scheme_ids())}"
        ) from None


def multiplier_kind(scheme_id: str) -> str:
    return _info(scheme_id).multiplier


def history_needed(scheme_id: str) -> int:
    return _info(scheme_id).history


def is_energy_scheme(scheme_id: str) -> bool:
    return _info(scheme_id).energy_scheme


def initial_state(
    scheme_id: str,
    m0: VectorField,
    dt: float,
    *,
    beta: float = 0.0,
    gamma: float = 1.0,
    stab: float = 0.0,
    t0: float = 0.0,
) -> SchemeState:
    """State at t0 from the initial field alone (histories grow by bootstrap).

    Type-I schemes start the multiplier at its continuous value |grad m0|^2;
    Type-II schemes (whose multiplier vanishes at the continuous level) and
    the multiplier-free baselines start at zero.
    """
    kind = multiplier_kind(scheme_id)
    lam0 = grad_norm_sq(m0) if kind == "type1" else np.zeros(m0.grid.shape)
    return make_state([m0], [lam0], t0, dt, SchemeParams(beta, gamma, stab))


# --------------------------------------------------------------------------
# shared machinery


def generic_corrector(a: float, b: float, r: VectorField) -> tuple[VectorField, np.ndarray]:
    """Solve ``(a - b*lam) m = r`` with ``|m| = 1`` pointwise.

    Of the two roots of ``(a - b*lam)^2 = |r|^2`` this returns the one
    consistent with the continuous multiplier (lam small, m aligned with +r):
    ``lam = (a - |r|)/b`` and ``m = r/|r|``.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"corrector coefficients must be positive, got a={a}, b={b}")
    n = np.sqrt((r.data * r.data).sum(axis=0))
    bad = n <= _TINY
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad)), n.shape)
        raise DegenerateFieldError(
            f"degenerate corrector: |r| = 0 at grid index ({i}, {j}), "
            f"x={r.grid.x[i]:.6g}, y={r.grid.y[j]:.6g} "
            "(likely loss of resolution or blowup)"
        )
    lam = (a - n) / b
    return VectorField(r.grid, r.data / n), lam


def _advance(
    state: SchemeState,
    m_new: VectorField,
    lam_new: np.ndarray,
    *,
    xi: float = 0.0,
    secant_iters: int = 0,
    dissipation_value: float | None = None,
    energy_value: float | None = None,
    flags: str = "",
    nan_to_flag: bool = False,
) -> tuple[SchemeState, RunRecord]:
    """Rotate history, stamp the time, and assemble the diagnostics row."""
    t_new = state.t + state.dt
    if not np.isfinite(m_new.data.sum()):
        if nan_to_flag:
            flags = "nan"
        else:
            raise InstabilityError(f"non-finite field at t={t_new:.6g}")

    gns = grad_norm_sq(m_new)
    e = float(0.5 * gns.sum() * m_new.grid.cell_area) if energy_value is None else energy_value
    d = state.params.gamma * dissipation(m_new) if dissipation_value is None else dissipation_value
    n = m_new.norm_pointwise()
    rec = RunRecord(
        t=t_new,
        energy=e,
        dissipation=float(d),
        xi=float(xi),
        secant_iters=int(secant_iters),
        min_len=float(n.min()),
        max_len=float(n.max()),
        grad_inf=float(np.sqrt(gns.max())),
        dt=state.dt,
        flags=flags,
    )
    new_state = SchemeState(
        m_hist=[m_new] + state.m_hist[:2],
        lam_hist=[lam_new] + state.lam_hist[:1],
        t=t_new,
        dt=state.dt,
        params=state.params,
        energy=e,
    )
    return new_state, rec


def _lambda_extrap(state: SchemeState, weights) -> np.ndarray | float:
    """B-combination of the multiplier-times-field history; 0.0 when empty."""
    acc = 0.0
    for w, lam, m in zip(weights, state.lam_hist, state.m_hist):
        acc = acc + w * (lam[None] * m.data)
    return acc


def _fterm_extrap(state: SchemeState, weights) -> np.ndarray:
    """Extrapolation of the history of f = |grad m|^2 m."""
    acc = 0.0
    for w, m in zip(weights, state.m_hist):
        acc = acc + w * (grad_norm_sq(m)[None] * m.data)
    return acc


def _cross_extrap(state: SchemeState, weights) -> np.ndarray:
    """Extrapolation of the history of m x lap(m)."""
    g = state.grid
    acc = 0.0
    for w, m in zip(weights, state.m_hist):
        acc = acc + w * _cross_data(m.data, laplacian(g, m.data))
    return acc


def _half_weights(state: SchemeState):
    return HALF_STEP_WEIGHTS[min(2, len(state.m_hist))]


# --------------------------------------------------------------------------
# operator splitting (first order, beta = 0, gamma = 1)


def splitting_step(state, forcing: Optional[Forcing] = None, settings=None):
    p = state.params
    if p.beta != 0.0 or p.gamma != 1.0:
        raise ValueError("the splitting scheme is defined for beta=0, gamma=1")
    g, dt = state.grid, state.dt
    rhs = state.m_hist[0].data
    if forcing is not None:
        rhs = rhs + dt * forcing(state.t + dt).data
    m_tilde = VectorField(g, helmholtz_solve(g, rhs, dt))
    m_new, lam = generic_corrector(1.0, dt, m_tilde)
    return _advance(state, m_new, lam)


# --------------------------------------------------------------------------
# BDF-k predictor-corrector family

def _bdf_table(state: SchemeState, k: int):
    # startup cascade: the effective order grows with the available history
    return BDF_TABLES[min(k, len(state.m_hist))]


def predictor_bdf(
    state: SchemeState,
    k: int,
    *,
    type2: bool = False,
    field_extrap: bool = False,
    forcing: Optional[Forcing] = None,
) -> VectorField:
    """Semi-implicit BDF-k predictor; returns the unconstrained field m~.

    Assembles ``A_k(m)/dt + gamma*B_{k-1}(lam m) [+ gamma*B_k(|grad m|^2 m)]
    [- beta*B_k(m x lap m)] + g(t^{n+1})`` and applies the Helmholtz inverse
    with coefficient ``gamma*dt/alpha_k``.  With ``field_extrap`` the Type-II
    term is evaluated at the extrapolated field instead of extrapolating the
    term's history values.
    """
    g, dt, p = state.grid, state.dt, state.params
    tb = _bdf_table(state, k)

    acc = 0.0
    for w, m in zip(tb.a_weights, state.m_hist):
        acc = acc + w * m.data

    expl = p.gamma * _lambda_extrap(state, tb.b_weights)
    if type2:
        if field_extrap:
            md = 0.0
            for w, m in zip(tb.bext_weights, state.m_hist):
                md = md + w * m.data
            mdag = VectorField(g, md)
            fterm = grad_norm_sq(mdag)[None] * mdag.data
        else:
            fterm = _fterm_extrap(state, tb.bext_weights)
        expl = expl + p.gamma * fterm
    if p.beta != 0.0:
        expl = expl - p.beta * _cross_extrap(state, tb.bext_weights)
    if not np.isscalar(expl):
        expl = dealias_product(g, expl)
    if forcing is not None:
        expl = expl + forcing(state.t + dt).data

    rhs = (acc + dt * expl) / tb.alpha
    return VectorField(g, helmholtz_solve(g, rhs, p.gamma * dt / tb.alpha))


def corrector_bdf(
    m_tilde: VectorField, state: SchemeState, k: int
) -> tuple[VectorField, np.ndarray]:
    """Closed-form length corrector paired with :func:`predictor_bdf`."""
    dt, p = state.dt, state.params
    tb = _bdf_table(state, k)
    r = tb.alpha * m_tilde.data - (dt * p.gamma) * _lambda_extrap(state, tb.b_weights)
    return generic_corrector(tb.alpha, dt * p.gamma, VectorField(state.grid, r))


def _make_bdf_step(k: int, type2: bool = False, field_extrap: bool = False):
    def step_fn(state, forcing: Optional[Forcing] = None, settings=None):
        m_tilde = predictor_bdf(
            state, k, type2=type2, field_extrap=field_extrap, forcing=forcing
        )
        m_new, lam = corrector_bdf(m_tilde, state, k)
        return _advance(state, m_new, lam)

    return step_fn


# --------------------------------------------------------------------------
# Crank-Nicolson predictor-corrector family


def _cn_predict(state: SchemeState, type2: bool, forcing: Optional[Forcing]):
    """CN predictor; returns (m~ data, lam^n m^n data, corrector coefficient)."""
    g, dt, p = state.grid, state.dt, state.params
    mn = state.m_hist[0].data
    lamn_mn = state.lam_hist[0][None] * mn

    expl = p.gamma * lamn_mn
    if type2:
        expl = expl + p.gamma * _fterm_extrap(state, _half_weights(state))
    if p.beta != 0.0:
        expl = expl - p.beta * _cross_extrap(state, _half_weights(state))
    expl = dealias_product(g, expl)
    if forcing is not None:
        expl = expl + forcing(state.t + 0.5 * dt).data

    c = 0.5 * p.gamma * dt
    mt = helmholtz_solve(g, mn + c * laplacian(g, mn) + dt * expl, c)
    return mt, lamn_mn, c


def cn_step(state, forcing: Optional[Forcing] = None, settings=None, *, type2: bool = False):
    mt, lamn_mn, c = _cn_predict(state, type2, forcing)
    m_new, lam = generic_corrector(1.0, c, VectorField(state.grid, mt - c * lamn_mn))
    return _advance(state, m_new, lam)


def semi_implicit_step(state, forcing: Optional[Forcing] = None, settings=None):
    """Plain semi-implicit CN step with no length enforcement.

    A non-finite result is flagged in the record rather than raised: the
    comparison harness expects this baseline to blow up.
    """
    p = state.params
    if p.beta != 0.0:
        raise ValueError("the semi-implicit baseline is defined for beta=0")
    g, dt = state.grid, state.dt
    mn = state.m_hist[0].data

    expl = p.gamma * _fterm_extrap(state, _half_weights(state))
    expl = dealias_product(g, expl)
    if forcing is not None:
        expl = expl + forcing(state.t + 0.5 * dt).data

    c = 0.5 * p.gamma * dt
    m_new = VectorField(g, helmholtz_solve(g, mn + c * laplacian(g, mn) + dt * expl, c))
    return _advance(state, m_new, state.lam_hist[0], nan_to_flag=True)


def projection_e_step(state, forcing: Optional[Forcing] = None, settings=None):
    """Second-order projection baseline with the dt*grad(|grad m|^2).grad(m)
    correction term and plain pointwise normalization."""
    p = state.params
    if p.beta != 0.0:
        raise ValueError("the projection baseline is defined for beta=0")
    g, dt = state.grid, state.dt
    mn = state.m_hist[0]

    sx, sy = gradient(g, grad_norm_sq(mn))
    gx, gy = gradient(g, mn.data)
    extra = sx[None] * gx + sy[None] * gy  # sum_d d_d(|grad m|^2) d_d(m_i)

    expl = p.gamma * dt * extra
    expl = dealias_product(g, expl)
    if forcing is not None:
        expl = expl + forcing(state.t + 0.5 * dt).data

    c = 0.5 * p.gamma * dt
    mt = helmholtz_solve(g, mn.data + c * laplacian(g, mn.data) + dt * expl, c)
    from .fields import normalize_pointwise

    m_new = normalize_pointwise(VectorField(g, mt))
    return _advance(state, m_new, state.lam_hist[0])


# --------------------------------------------------------------------------
# Gauss-Seidel stabilized scheme (general beta)


def gauss_seidel_predictor(state: SchemeState, forcing: Optional[Forcing] = None) -> VectorField:
    """Sequential three-component predictor for the stabilized beta != 0 form.

    All explicit quantities live at the half level t^{n+1/2}: the dagger
    extrapolant is 3/2 m^n - 1/2 m^{n-1}, and components 2 and 3 replace it
    with the freshly solved averages (m~_k + m_k^n)/2 in their precession
    coupling.  The stabilization S(lap m~^{n+1/2} - lap m^dagger) is zero-sum
    to second order.  Each component costs one constant-coefficient Helmholtz
    solve with coefficient (S+gamma)*dt/2.
    """
    g, dt, p = state.grid, state.dt, state.params
    mn = state.m_hist[0].data
    if len(state.m_hist) >= 2:
        dag = 1.5 * mn - 0.5 * state.m_hist[1].data
    else:
        dag = mn
    ldag = laplacian(g, dag)
    lmn = laplacian(g, mn)

    c = 0.5 * (p.stab + p.gamma) * dt
    lam_term = dealias_product(g, p.gamma * (state.lam_hist[0][None] * mn))
    base = mn + c * lmn + dt * (lam_term - p.stab * ldag)
    if forcing is not None:
        base = base + dt * forcing(state.t + 0.5 * dt).data

    b = p.beta
    cross1 = dealias_product(g, dag[1] * ldag[2] - dag[2] * ldag[1])
    mt1 = helmholtz_solve(g, base[0] - dt * b * cross1, c)
    half1 = 0.5 * (mt1 + mn[0])
    lhalf1 = laplacian(g, half1)

    cross2 = dealias_product(g, half1 * ldag[2] - dag[2] * lhalf1)
    mt2 = helmholtz_solve(g, base[1] + dt * b * cross2, c)
    half2 = 0.5 * (mt2 + mn[1])
    lhalf2 = laplacian(g, half2)

    cross3 = dealias_product(g, half1 * lhalf2 - half2 * lhalf1)
    mt3 = helmholtz_solve(g, base[2] - dt * b * cross3, c)

    return VectorField(g, np.stack([mt1, mt2, mt3]))


def _gs_predict(state: SchemeState, forcing: Optional[Forcing]):
    mt = gauss_seidel_predictor(state, forcing)
    lamn_mn = state.lam_hist[0][None] * state.m_hist[0].data
    c = 0.5 * state.params.gamma * state.dt
    return mt.data, lamn_mn, c


def gauss_seidel_step(state, forcing: Optional[Forcing] = None, settings=None):
    mt, lamn_mn, c = _gs_predict(state, forcing)
    m_new, lam = generic_corrector(1.0, c, VectorField(state.grid, mt - c * lamn_mn))
    return _advance(state, m_new, lam)


# --------------------------------------------------------------------------
# dispatcher


def step(state: SchemeState, scheme_id: str, *, forcing: Optional[Forcing] = None, secant=None):
    """Advance one step with the named scheme.

    ``secant`` (a :class:`~llg2d.energy_fix.SecantSettings`) only applies to
    the energy-dissipative schemes.
    """
    info = _info(scheme_id)
    if len(state.m_hist) < 1:
        raise ValueError("state has no history")
    return info.step(state, forcing=forcing, settings=secant)


def _cn_t2_step(state, forcing=None, settings=None):
    return cn_step(state, forcing=forcing, type2=True)


register_scheme("splitting", splitting_step, multiplier="type1", history=1)
register_scheme("bdf1", _make_bdf_step(1), multiplier="type1", history=1)
register_scheme("bdf2", _make_bdf_step(2), multiplier="type1", history=2)
register_scheme("bdf3", _make_bdf_step(3), multiplier="type1", history=3)
register_scheme("bdf1-t2", _make_bdf_step(1, type2=True), multiplier="type2", history=1)
register_scheme("bdf2-t2", _make_bdf_step(2, type2=True), multiplier="type2", history=2)
register_scheme("bdf3-t2", _make_bdf_step(3, type2=True), multiplier="type2", history=3)
register_scheme("cn", cn_step, multiplier="type1", history=1)
register_scheme("cn-t2", _cn_t2_step, multiplier="type2", history=2)
register_scheme("semi-implicit", semi_implicit_step, multiplier="none", history=2)
register_scheme("projection-e", projection_e_step, multiplier="none", history=1)
register_scheme("gauss-seidel", gauss_seidel_step, multiplier="type1", history=2)
register_scheme(
    "llg-bdf2",
    _make_bdf_step(2, type2=True, field_extrap=True),
    multiplier="type2",
    history=2,
)
