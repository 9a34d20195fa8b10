"""Command-line interface.

Subcommands::

    llg2d run        one simulation (fixed-step or adaptive)
    llg2d converge   error/order sweep over a halving dt ladder
    llg2d compare    multi-scheme error table against the RK4 reference
    llg2d reproduce  canned experiments: table1 table2 table4 blowup adaptive

Options can also come from a config file (``--config path``) holding one
``key = value`` pair per line with ``#`` comments; command-line flags
override file values, which override defaults.  Unknown keys are rejected.
Progress goes to stderr; data only to files.  LLG_NUM_THREADS caps the
fan-out of independent runs (0 = auto).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path
from typing import Optional, Sequence

from . import io as _io
from .adaptive import AdaptiveSettings
from .energy_fix import SecantSettings
from .harness import (
    TABLE4_SCHEMES,
    TABLE4_TIMES,
    ExperimentSpec,
    compare_study,
    convergence_study,
    reproduce,
    run_experiment,
)
from .problems import PROBLEMS
from .schemes import scheme_ids

__all__ = ["Config", "parse_cli", "main"]


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.replace(";", ",").split(",") if p.strip()]


def _str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


@dataclass
class Config:
    """Merged run configuration (CLI > config file > defaults)."""

    scheme: Optional[str] = None
    ic: Optional[str] = None
    nx: int = 128
    ny: Optional[int] = None
    dt: Optional[float] = None
    tmax: float = 0.01
    beta: float = 0.0
    gamma: float = 1.0
    stab: float = 0.0
    out: str = "llg2d-out"
    snapshots: Optional[list[float]] = None
    secant_tol: float = 1e-12
    secant_max_iters: int = 50
    xi_init_scale: float = 1.0
    adaptive: bool = False
    adaptive_tol: float = 5e-5
    dt_min: float = 1e-6
    dt_max: float = 1e-2
    rho: float = 0.95
    dealias: bool = False
    seed: int = 0
    figures: bool = True
    progress_every: int = 0
    dts: Optional[list[float]] = None
    times: Optional[list[float]] = None
    schemes: Optional[list[str]] = None
    ref_dt: float = 1e-6


# key -> parser for config-file values; names use the CLI's hyphen spelling
_KEY_PARSERS = {
    "scheme": str,
    "ic": str,
    "nx": int,
    "ny": int,
    "dt": float,
    "tmax": float,
    "beta": float,
    "gamma": float,
    "stab": float,
    "out": str,
    "snapshots": _float_list,
    "secant-tol": float,
    "secant-max-iters": int,
    "xi-init-scale": float,
    "adaptive": _bool,
    "adaptive-tol": float,
    "dt-min": float,
    "dt-max": float,
    "rho": float,
    "dealias": _bool,
    "seed": int,
    "figures": _bool,
    "progress-every": int,
    "dts": _float_list,
    "times": _float_list,
    "schemes": _str_list,
    "ref-dt": float,
}


def _read_config_file(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEY_PARSERS:
            raise ValueError(
                f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                + ", ".join(sorted(_KEY_PARSERS))
            )
        try:
            values[key.replace("-", "_")] = _KEY_PARSERS[key](value.strip())
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llg2d",
        description="Length-preserving pseudo-spectral time integrators for the "
        "2D Landau-Lifshitz(-Gilbert) equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--scheme", choices=scheme_ids())
        p.add_argument("--ic", choices=sorted(PROBLEMS))
        p.add_argument("--nx", type=int)
        p.add_argument("--ny", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--tmax", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--stab", type=float, help="stabilization constant S")
        p.add_argument("--out", help="output directory")
        p.add_argument("--secant-tol", type=float)
        p.add_argument("--secant-max-iters", type=int)
        p.add_argument("--xi-init-scale", type=float)
        p.add_argument("--dealias", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--seed", type=int)
        p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--progress-every", type=int)

    run_p = sub.add_parser("run", help="run a single simulation")
    add_common(run_p)
    run_p.add_argument("--snapshots", type=_float_list, help="comma-separated snapshot times")
    run_p.add_argument("--adaptive", action=argparse.BooleanOptionalAction, default=None)
    run_p.add_argument("--adaptive-tol", type=float)
    run_p.add_argument("--dt-min", type=float)
    run_p.add_argument("--dt-max", type=float)
    run_p.add_argument("--rho", type=float)

    conv_p = sub.add_parser("converge", help="dt sweep with observed orders")
    add_common(conv_p)
    conv_p.add_argument("--dts", type=_float_list, help="comma-separated, halving, decreasing")
    conv_p.add_argument("--ref-dt", type=float, help="RK4 reference step (reference problems)")

    cmp_p = sub.add_parser("compare", help="multi-scheme error table vs the RK4 reference")
    add_common(cmp_p)
    cmp_p.add_argument("--schemes", type=_str_list, help="comma-separated scheme ids")
    cmp_p.add_argument("--times", type=_float_list, help="comma-separated report times")
    cmp_p.add_argument("--ref-dt", type=float)

    rep_p = sub.add_parser("reproduce", help="canned experiments")
    rep_p.add_argument("target", choices=["table1", "table2", "table4", "blowup", "adaptive"])
    rep_p.add_argument("--out")
    rep_p.add_argument(
        "--fast", action="store_true", help="desk-scale settings (coarser reference / shorter runs)"
    )
    return parser


def parse_cli(argv: Sequence[str]) -> tuple[str, argparse.Namespace, Config]:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "reproduce":
        return ns.command, ns, Config()

    cfg = Config()
    if ns.config:
        for key, value in _read_config_file(ns.config).items():
            setattr(cfg, key, value)
    field_names = {f.name for f in dc_fields(Config)}
    for key, value in vars(ns).items():
        if key in ("command", "config") or value is None:
            continue
        if key in field_names:
            setattr(cfg, key, value)

    if cfg.scheme is not None and cfg.scheme not in scheme_ids():
        raise ValueError(
            f"unknown scheme {cfg.scheme!r}; valid ids: {', '.join(scheme_ids())}"
        )
    if cfg.ic is not None and cfg.ic not in PROBLEMS:
        raise ValueError(
            f"unknown initial condition {cfg.ic!r}; valid ids: {', '.join(sorted(PROBLEMS))}"
        )
    return ns.command, ns, cfg


def _spec_from(cfg: Config) -> ExperimentSpec:
    if cfg.scheme is None:
        raise ValueError("missing required option: --scheme")
    if cfg.ic is None:
        raise ValueError("missing required option: --ic")
    if not cfg.adaptive and cfg.dt is None:
        raise ValueError("missing required option: --dt (or --adaptive)")
    adaptive = (
        AdaptiveSettings(tol=cfg.adaptive_tol, dt_min=cfg.dt_min, dt_max=cfg.dt_max, rho=cfg.rho)
        if cfg.adaptive
        else None
    )
    return ExperimentSpec(
        scheme=cfg.scheme,
        ic=cfg.ic,
        dt=cfg.dt,
        t_end=cfg.tmax,
        nx=cfg.nx,
        ny=cfg.ny,
        beta=cfg.beta,
        gamma=cfg.gamma,
        stab=cfg.stab,
        adaptive=adaptive,
        secant=SecantSettings(cfg.secant_tol, cfg.secant_max_iters, cfg.xi_init_scale),
        snapshot_times=tuple(cfg.snapshots or ()),
        out_dir=cfg.out,
        figures=cfg.figures,
        dealias=cfg.dealias,
        seed=cfg.seed,
        progress_every=cfg.progress_every,
    )


def _cmd_run(cfg: Config) -> int:
    run_experiment(_spec_from(cfg))
    return 0


def _cmd_converge(cfg: Config) -> int:
    if cfg.scheme is None or cfg.ic is None:
        raise ValueError("converge needs --scheme and --ic")
    if not cfg.dts or len(cfg.dts) < 2:
        raise ValueError("converge needs --dts with at least two step sizes")
    rows = convergence_study(
        cfg.scheme,
        cfg.ic,
        cfg.dts,
        cfg.tmax,
        nx=cfg.nx,
        beta=cfg.beta,
        gamma=cfg.gamma,
        stab=cfg.stab,
        secant=SecantSettings(cfg.secant_tol, cfg.secant_max_iters, cfg.xi_init_scale),
        ref_dt=cfg.ref_dt,
        progress=True,
    )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _io.write_convergence_csv(out / f"converge_{cfg.scheme}.csv", rows)
    if cfg.figures:
        from . import plotting

        plotting.plot_convergence({cfg.scheme: rows}, out / f"converge_{cfg.scheme}.png")
    for dt, err, order in rows:
        print(f"dt={dt:g} error={err:.6g} order={'-' if order is None else f'{order:.2f}'}")
    return 0


def _cmd_compare(cfg: Config) -> int:
    ic = cfg.ic or "benchmark"
    schemes = cfg.schemes or list(TABLE4_SCHEMES)
    for s in schemes:
        if s not in scheme_ids():
            raise ValueError(f"unknown scheme {s!r}; valid ids: {', '.join(scheme_ids())}")
    times = cfg.times or list(TABLE4_TIMES)
    dt = cfg.dt if cfg.dt is not None else 1e-4
    errors = compare_study(
        schemes, ic, dt, times,
        nx=cfg.nx if cfg.nx != 128 else 64,
        beta=cfg.beta, gamma=cfg.gamma, stab=cfg.stab,
        ref_dt=cfg.ref_dt, progress=True,
    )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _io.write_compare_csv(out / "compare.csv", times, errors)
    if cfg.figures:
        from . import plotting

        plotting.plot_compare(times, errors, out / "compare.png")
    header = "t      " + "  ".join(f"{s:>14s}" for s in schemes)
    print(header)
    for i, t in enumerate(times):
        print(f"{t:<6g} " + "  ".join(f"{errors[s][i]:>14.6g}" for s in schemes))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, ns, cfg = parse_cli(argv)
        if command == "run":
            return _cmd_run(cfg)
        if command == "converge":
            return _cmd_converge(cfg)
        if command == "compare":
            return _cmd_compare(cfg)
        if command == "reproduce":
            reproduce(ns.target, ns.out or f"llg2d-out/{ns.target}", fast=ns.fast)
            return 0
        raise ValueError(f"unknown command {command!r}")
    except (ValueError, OSError) as exc:
        print(f"llg2d: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # scheme failures: diagnostic + nonzero exit
        print(f"llg2d: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
