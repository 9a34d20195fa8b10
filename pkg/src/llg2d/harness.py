"""Experiment drivers: fixed-step runs, convergence studies, multi-scheme
comparisons, and the canned reproduction experiments.

Convergence runs take ``n = round(t_end/dt)`` uniform steps — a truncated
final step would break the constant-step multistep formulas at exactly the
accuracy level the tables probe.  For the manufactured problem the error is
measured against the exact solution at the reached time; reference-based
problems compare against the cached RK4 solution at ``t_end``.
"""

from __future__ import annotations

import concurrent.futures
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import io as _io
from .adaptive import AdaptiveSettings, adaptive_run
from .energy_fix import SecantSettings
from .errors import InstabilityError
from .fields import RunRecord, VectorField, avg_linf_error, dissipation, grad_inf, length_deviation
from .grid import Grid2D
from .problems import (
    ManufacturedSolution,
    Problem,
    get_problem,
    make_grid_for,
    seeded_manufactured_state,
)
from .reference import cached_reference
from .schemes import SchemeState, initial_state, scheme_ids, step

__all__ = [
    "ExperimentSpec",
    "run_fixed",
    "initial_record",
    "run_experiment",
    "convergence_study",
    "compare_study",
    "reproduce",
    "worker_count",
    "TABLE4_SCHEMES",
    "TABLE4_TIMES",
    "BLOWUP_SNAPSHOT_TIMES",
]

TABLE4_SCHEMES = ("semi-implicit", "projection-e", "cn", "cn-t2", "llg-bdf2")
TABLE4_TIMES = (0.01, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.16)
BLOWUP_SNAPSHOT_TIMES = (0.0, 0.001, 0.01, 0.05, 0.1, 0.2, 0.4, 0.5, 0.6)


def worker_count(n_jobs: int) -> int:
    """Fan-out width for independent runs, capped by LLG_NUM_THREADS (0 = auto)."""
    raw = os.environ.get("LLG_NUM_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"LLG_NUM_THREADS must be an integer, got {raw!r}") from None
    if cap < 0:
        raise ValueError(f"LLG_NUM_THREADS must be >= 0, got {cap}")
    if cap == 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def initial_record(state: SchemeState) -> RunRecord:
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


def run_fixed(
    state: SchemeState,
    scheme_id: str,
    n_steps: int,
    *,
    forcing=None,
    secant: SecantSettings | None = None,
    stop_on_nan: bool = True,
    on_step: Optional[Callable[[int, SchemeState, RunRecord], None]] = None,
) -> tuple[list[RunRecord], SchemeState]:
    """Take n_steps fixed-size steps; a flagged non-finite step ends the run."""
    records: list[RunRecord] = []
    for i in range(n_steps):
        state, rec = step(state, scheme_id, forcing=forcing, secant=secant)
        records.append(rec)
        if on_step is not None:
            on_step(i, state, rec)
        if stop_on_nan and rec.flags == "nan":
            break
    return records, state


@dataclass(frozen=True)
class ExperimentSpec:
    """A single simulation, resolvable entirely from registered ids."""

    scheme: str
    ic: str
    dt: float | None = None
    t_end: float = 0.01
    nx: int = 128
    ny: int | None = None
    beta: float = 0.0
    gamma: float = 1.0
    stab: float = 0.0
    adaptive: AdaptiveSettings | None = None
    secant: SecantSettings = field(default_factory=SecantSettings)
    snapshot_times: tuple[float, ...] = ()
    out_dir: str | None = None
    figures: bool = True
    dealias: bool = False
    seed: int = 0
    progress_every: int = 0

    def validate(self) -> None:
        if self.scheme not in scheme_ids():
            raise ValueError(
                f"unknown scheme {self.scheme!r}; valid ids: {', '.join(scheme_ids())}"
            )
        get_problem(self.ic)
        if self.adaptive is None and (self.dt is None or self.dt <= 0):
            raise ValueError("a fixed-step run needs dt > 0 (or adaptive settings)")
        if self.t_end <= 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")


def _forcing_for(problem: Problem, grid: Grid2D, beta: float, gamma: float):
    if not problem.forced:
        return None
    ms = ManufacturedSolution()
    return lambda t: ms.forcing(grid, t, beta, gamma)


def _progress(msg: str, enabled: bool = True) -> None:
    if enabled:
        print(msg, file=sys.stderr, flush=True)


def run_experiment(spec: ExperimentSpec) -> list[RunRecord]:
    """Run one experiment and persist records, snapshots, and figures."""
    spec.validate()
    problem = get_problem(spec.ic)
    grid = make_grid_for(problem, spec.nx, spec.ny, dealias=spec.dealias)
    m0 = problem.ic(grid)
    forcing = _forcing_for(problem, grid, spec.beta, spec.gamma)

    out = Path(spec.out_dir) if spec.out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    snap_times = sorted(spec.snapshot_times)

    def snap(m: VectorField, t: float):
        if out is not None:
            _io.write_snapshot(out / f"snap_t{t:.6f}.llgf", m, t)

    if spec.adaptive is not None:
        state = initial_state(
            spec.scheme, m0, 1e-4 if spec.dt is None else spec.dt,
            beta=spec.beta, gamma=spec.gamma, stab=spec.stab,
        )
        if snap_times and abs(snap_times[0]) < 1e-15:
            snap(m0, 0.0)
        records, state = adaptive_run(
            state, spec.scheme, spec.adaptive, spec.t_end, secant=spec.secant, forcing=forcing
        )
        if snap_times:
            snap(state.m_hist[0], state.t)
    else:
        dt = spec.dt
        n_steps = max(1, round(spec.t_end / dt))
        state = initial_state(
            spec.scheme, m0, dt, beta=spec.beta, gamma=spec.gamma, stab=spec.stab
        )
        records = [initial_record(state)]
        pending = [t for t in snap_times]
        if pending and abs(pending[0]) < 1e-15:
            snap(m0, 0.0)
            pending.pop(0)

        def on_step(i, st, rec):
            while pending and rec.t >= pending[0] - 0.25 * dt:
                snap(st.m_hist[0], rec.t)
                pending.pop(0)
            if spec.progress_every and (i + 1) % spec.progress_every == 0:
                _progress(f"[{spec.scheme}] step {i + 1}/{n_steps} t={rec.t:.6g} E={rec.energy:.6g}")

        recs, state = run_fixed(
            state, spec.scheme, n_steps, forcing=forcing, secant=spec.secant, on_step=on_step
        )
        records.extend(recs)

    if out is not None:
        _io.write_records_csv(out / "records.csv", records)
        if spec.figures:
            from . import plotting

            plotting.plot_records(records, out, adaptive=spec.adaptive is not None)
    return records


def _error_vs(m: VectorField, target: VectorField) -> float:
    return avg_linf_error(m, target)


def _make_state(scheme: str, problem: Problem, grid: Grid2D, dt: float, beta, gamma, stab) -> SchemeState:
    if problem.forced:
        return seeded_manufactured_state(scheme, grid, dt, beta=beta, gamma=gamma, stab=stab)
    m0 = problem.ic(grid)
    return initial_state(scheme, m0, dt, beta=beta, gamma=gamma, stab=stab)


def convergence_study(
    scheme: str,
    problem_name: str,
    dts: Sequence[float],
    t_end: float,
    *,
    nx: int = 128,
    beta: float = 0.0,
    gamma: float = 1.0,
    stab: float = 0.0,
    secant: SecantSettings | None = None,
    ref_dt: float = 1e-6,
    cache_dir=None,
    collect_records: bool = False,
    progress: bool = False,
):
    """Error and observed order over a halving dt sweep.

    Returns rows ``(dt, error, order)`` (order ``None`` on the first row or
    where undefined); with ``collect_records`` also returns the per-dt record
    lists.  An unstable run yields a NaN error row instead of failing.
    """
    dts = [float(d) for d in dts]
    if len(dts) < 2:
        raise ValueError("need at least two step sizes to measure orders")
    for a, b in zip(dts, dts[1:]):
        if not b < a:
            raise ValueError(f"step sizes must be strictly decreasing, got {dts}")
        if abs(a / b - 2.0) > 0.02:
            raise ValueError(f"step sizes must halve (order column is log2), got {a} -> {b}")

    problem = get_problem(problem_name)
    grid = make_grid_for(problem, nx)
    forcing = _forcing_for(problem, grid, beta, gamma)
    exact = ManufacturedSolution() if problem.forced else None
    reference = None
    if exact is None:
        reference = cached_reference(
            problem_name, problem.ic(grid), ref_dt, t_end, beta, gamma, cache_dir=cache_dir
        )

    errors: list[float] = []
    all_records: dict[float, list[RunRecord]] = {}
    for dt in dts:
        n_steps = max(1, round(t_end / dt))
        state = _make_state(scheme, problem, grid, dt, beta, gamma, stab)
        try:
            recs, state = run_fixed(state, scheme, n_steps, forcing=forcing, secant=secant)
            if recs and recs[-1].flags == "nan":
                err = float("nan")
            else:
                target = exact.field(grid, state.t) if exact is not None else reference
                err = _error_vs(state.m_hist[0], target)
        except InstabilityError:
            recs, err = [], float("nan")
        errors.append(err)
        all_records[dt] = recs
        _progress(f"[{scheme}] dt={dt:g}: error={err:.4g}", progress)

    rows = []
    for i, (dt, err) in enumerate(zip(dts, errors)):
        if i == 0 or not np.isfinite(err) or not np.isfinite(errors[i - 1]) or err == 0:
            order = None
        else:
            order = float(np.log2(errors[i - 1] / err))
        rows.append((dt, err, order))
    if collect_records:
        return rows, all_records
    return rows


def compare_study(
    schemes: Sequence[str],
    problem_name: str,
    dt: float,
    times: Sequence[float],
    *,
    nx: int = 64,
    beta: float = 0.0,
    gamma: float = 1.0,
    stab: float = 0.0,
    ref_dt: float = 1e-6,
    cache_dir=None,
    collect_records: bool = False,
    progress: bool = False,
):
    """Errors against the RK4 reference at a list of report times.

    A scheme that goes non-finite contributes NaN from that time onward
    (instability is reported, not fatal).
    """
    times = [float(t) for t in times]
    if sorted(times) != times:
        raise ValueError("report times must be increasing")
    problem = get_problem(problem_name)
    grid = make_grid_for(problem, nx)
    forcing = _forcing_for(problem, grid, beta, gamma)
    refs = {
        t: cached_reference(problem_name, problem.ic(grid), ref_dt, t, beta, gamma, cache_dir=cache_dir)
        for t in times
    }

    def one(scheme: str):
        state = _make_state(scheme, problem, grid, dt, beta, gamma, stab)
        errs: list[float] = []
        records: list[RunRecord] = [initial_record(state)]
        dead = False
        t_done = 0.0
        for t in times:
            n_steps = round((t - t_done) / dt)
            if not dead:
                try:
                    recs, state = run_fixed(state, scheme, n_steps, forcing=forcing)
                    records.extend(recs)
                    dead = bool(recs and recs[-1].flags == "nan")
                except InstabilityError:
                    dead = True
            errs.append(float("nan") if dead else _error_vs(state.m_hist[0], refs[t]))
            t_done = t
        _progress(f"[{scheme}] done", progress)
        return errs, records

    n_workers = worker_count(len(schemes))
    if n_workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(one, schemes))
    else:
        results = [one(s) for s in schemes]
    errors = {s: r[0] for s, r in zip(schemes, results)}
    if collect_records:
        return errors, {s: r[1] for s, r in zip(schemes, results)}
    return errors


# --------------------------------------------------------------------------
# canned reproduction experiments

TABLE1_DTS = (1.6e-3, 8e-4, 4e-4, 2e-4, 1e-4, 5e-5)
TABLE2_DTS = (8e-4, 4e-4, 2e-4, 1e-4, 5e-5, 2.5e-5)


def _write_lattice_csv(path, dts, columns: dict[str, list[tuple]]) -> None:
    names = list(columns)
    header = "dt," + ",".join(f"{n}_error,{n}_order" for n in names)
    lines = [header]
    for i, dt in enumerate(dts):
        cells = [_io._fmt(dt)]
        for n in names:
            _, err, order = columns[n][i]
            cells.append(_io._fmt(err))
            cells.append("-" if order is None else _io._fmt(order))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def reproduce(name: str, out_dir, *, fast: bool = False, progress: bool = True) -> None:
    """Run one of the canned experiments, writing CSVs and figures.

    ``fast`` trades reference resolution / step counts for desk-scale
    runtimes (documented per experiment below); the defaults match the
    reported setups.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from . import plotting

    if name == "table1":
        dts = TABLE1_DTS[:5] if fast else TABLE1_DTS
        columns = {}
        for scheme, beta in (("bdf1", 1.0), ("bdf2", 1.0), ("bdf3", 1.0), ("cn", 0.0)):
            rows = convergence_study(
                scheme, "manufactured", dts, 0.01, nx=128, beta=beta, gamma=1.0, progress=progress
            )
            columns[scheme] = rows
            _io.write_convergence_csv(out / f"converge_{scheme}.csv", rows)
            plotting.plot_convergence({scheme: rows}, out / f"converge_{scheme}.png")
        _write_lattice_csv(out / "table1.csv", dts, columns)
        plotting.plot_convergence(columns, out / "table1.png")
    elif name == "table2":
        ref_dt = 1e-5 if fast else 1e-6
        columns = {}
        for scheme in ("cn", "bdf1-energy", "cn-energy"):
            rows = convergence_study(
                scheme, "smooth-6.2", TABLE2_DTS, 0.01, nx=128, ref_dt=ref_dt, progress=progress
            )
            columns[scheme] = rows
            _io.write_convergence_csv(out / f"converge_{scheme}.csv", rows)
        _write_lattice_csv(out / "table2.csv", TABLE2_DTS, columns)
        plotting.plot_convergence(columns, out / "table2.png")
    elif name == "table4":
        ref_dt = 2e-5 if fast else 1e-6
        errors = compare_study(
            list(TABLE4_SCHEMES), "benchmark", 1e-4, list(TABLE4_TIMES),
            nx=64, ref_dt=ref_dt, progress=progress,
        )
        _io.write_compare_csv(out / "table4.csv", list(TABLE4_TIMES), errors)
        plotting.plot_compare(list(TABLE4_TIMES), errors, out / "table4.png")
    elif name == "blowup":
        dt = 1e-4 if fast else 1e-5
        spec = ExperimentSpec(
            scheme="gauss-seidel", ic="benchmark", dt=dt, t_end=0.6, nx=64,
            beta=1.0, gamma=1.0, stab=0.5,
            snapshot_times=BLOWUP_SNAPSHOT_TIMES, out_dir=str(out), progress_every=1000,
        )
        run_experiment(spec)
    elif name == "adaptive":
        fixed = ExperimentSpec(
            scheme="cn-energy", ic="benchmark", dt=1e-4, t_end=0.1 if fast else 0.2,
            nx=64, out_dir=str(out / "fixed"),
        )
        run_experiment(fixed)
        adaptive = replace(
            fixed,
            adaptive=AdaptiveSettings(tol=5e-5),
            out_dir=str(out / "adaptive"),
        )
        run_experiment(adaptive)
    else:
        raise ValueError(
            f"unknown experiment {name!r}; choose from table1, table2, table4, blowup, adaptive"
        )
