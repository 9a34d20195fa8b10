"""Figure rendering for the report path: every driver that writes a CSV can
drop the matching PNGs next to it.  Headless backend; no interactive use."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_records", "plot_convergence", "plot_compare"]


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_records(records, out_dir, *, adaptive: bool = False) -> None:
    """Time-series figures from a run's diagnostics rows.

    Always writes energy.png and grad_inf.png; xi.png and iterations.png when
    the run used an energy scheme; dt.png for adaptive runs.
    """
    out = Path(out_dir)
    t = np.array([r.t for r in records])

    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(t, [r.energy for r in records], lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    _save(fig, out / "energy.png")

    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(t, [r.grad_inf for r in records], lw=1.2, color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel(r"max $|\nabla m|$")
    _save(fig, out / "grad_inf.png")

    if any(r.secant_iters for r in records):
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        ax.plot(t, [r.xi for r in records], lw=1.0, color="tab:green")
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\xi$")
        _save(fig, out / "xi.png")

        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        ax.step(t, [r.secant_iters for r in records], lw=1.0, where="post")
        ax.set_xlabel("t")
        ax.set_ylabel("secant iterations")
        _save(fig, out / "iterations.png")

    if adaptive:
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        ax.semilogy(t[1:], [r.dt for r in records[1:]], lw=1.0, color="tab:purple")
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\delta t$")
        _save(fig, out / "dt.png")


def plot_convergence(columns: dict, path) -> None:
    """log-log error vs dt, one line per scheme; NaN rows are dropped."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for name, rows in columns.items():
        dts = [r[0] for r in rows if np.isfinite(r[1])]
        errs = [r[1] for r in rows if np.isfinite(r[1])]
        if dts:
            ax.loglog(dts, errs, "o-", ms=4, label=name)
    ax.set_xlabel(r"$\delta t$")
    ax.set_ylabel(r"avg $L^\infty$ error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_compare(times, errors: dict, path) -> None:
    """Semilog error-vs-time comparison across schemes."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for name, errs in errors.items():
        pts = [(t, e) for t, e in zip(times, errs) if np.isfinite(e)]
        if pts:
            ax.semilogy([p[0] for p in pts], [p[1] for p in pts], "o-", ms=4, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel(r"avg $L^\infty$ error")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)
