"""Experiment driver.

Subcommands:

    safelift run <config> [--out DIR] [--svg]
    safelift sweep <config> [--out DIR]
    safelift check-assumptions <config> [--grid N]
    safelift version

Exit codes: 0 success, 2 configuration error, 3 runtime violation (an
aborted simulation, or assumption-check violations).

`run` writes trace.csv (the full trajectory), cert.txt (the certificate),
states_input.csv (t, x1, x2, u) and estimation_errors.csv (parameter
estimation errors, plain and log10) into the output directory; --svg adds
simple vector plots of both. `sweep` writes one sweep.csv row per
parameter combination and keeps going past per-row failures.
"""

from __future__ import annotations

import argparse
import sys
from importlib.metadata import PackageNotFoundError, version as pkg_version
from pathlib import Path

import numpy as np

from .config import apply_overrides, load_config, sweep_rows
from .errors import ConfigError, SafeliftError
from .monitor import certify
from .plant import check_assumptions
from .simulator import run as run_sim

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_RUNTIME = 3


def _package_version() -> str:
    try:
        return pkg_version("safelift")
    except PackageNotFoundError:
        return "0.1.0+uninstalled"


def _write_states_input(path, traj) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,x1,x2,u\n")
        for i in range(len(traj.t)):
            fh.write(f"{traj.t[i]:.15g},{traj.x1[i]:.15g},"
                     f"{traj.x2[i]:.15g},{traj.u[i]:.15g}\n")


def _write_estimation_errors(path, traj, plant, safe_set) -> None:
    th1_err = np.abs(traj.theta1_hat - plant.theta1)
    p2_err = np.abs(traj.p2_hat - 1.0 / plant.theta2)
    floor = 1e-300
    with open(path, "w", newline="") as fh:
        fh.write("t,theta1_err,p2_err,log10_theta1_err,log10_p2_err\n")
        for i in range(len(traj.t)):
            fh.write(f"{traj.t[i]:.15g},{th1_err[i]:.15g},{p2_err[i]:.15g},"
                     f"{np.log10(max(th1_err[i], floor)):.15g},"
                     f"{np.log10(max(p2_err[i], floor)):.15g}\n")


def _render_svg(path, title, t, series, width=900, height=360) -> None:
    """Minimal polyline plot, one panel, shared time axis."""
    pad = 50
    t0, t1 = float(t[0]), float(t[-1]) if len(t) > 1 else float(t[0]) + 1.0
    lo = min(float(np.min(y)) for _, y in series)
    hi = max(float(np.max(y)) for _, y in series)
    if hi - lo < 1e-12:
        hi, lo = hi + 1.0, lo - 1.0
    sx = (width - 2 * pad) / (t1 - t0)
    sy = (height - 2 * pad) / (hi - lo)
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2}" y="20" text-anchor="middle" '
             f'font-family="sans-serif" font-size="14">{title}</text>',
             f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
             f'height="{height - 2 * pad}" fill="none" stroke="#444"/>']
    for k, (label, y) in enumerate(series):
        pts = " ".join(
            f"{pad + (float(t[i]) - t0) * sx:.2f},"
            f"{height - pad - (float(y[i]) - lo) * sy:.2f}"
            for i in range(0, len(t), max(1, len(t) // 2000)))
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.2"/>')
        parts.append(f'<text x="{pad + 8}" y="{pad + 16 + 16 * k}" fill="{color}" '
                     f'font-family="sans-serif" font-size="12">{label}</text>')
    for val, anchor_y in ((hi, pad + 4), (lo, height - pad)):
        parts.append(f'<text x="{pad - 6}" y="{anchor_y}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{val:.3g}</text>')
    parts.append(f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" '
                 f'font-family="sans-serif" font-size="11">t = {t1:.3g} s</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def _cmd_run(args) -> int:
    ec = load_config(args.config)
    out_dir = Path(args.out) if args.out else ec.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    traj = run_sim(ec.sim)
    cert = certify(traj, ec.sim, ec.thresholds)

    traj.to_csv(out_dir / "trace.csv")
    cert.write(out_dir / "cert.txt")
    _write_states_input(out_dir / "states_input.csv", traj)
    _write_estimation_errors(out_dir / "estimation_errors.csv", traj,
                             ec.sim.plant, ec.sim.safe_set)
    if args.svg:
        _render_svg(out_dir / "states_input.svg", "states and control input",
                    traj.t, [("x1", traj.x1), ("x2", traj.x2), ("u", traj.u)])
        th1_err = np.log10(np.maximum(np.abs(traj.theta1_hat - ec.sim.plant.theta1), 1e-300))
        p2_err = np.log10(np.maximum(np.abs(traj.p2_hat - 1.0 / ec.sim.plant.theta2), 1e-300))
        _render_svg(out_dir / "estimation_errors.svg",
                    "log10 parameter estimation errors",
                    traj.t, [("log10|theta1 err|", th1_err), ("log10|p2 err|", p2_err)])

    if traj.failure is not None:
        print(f"simulation aborted at t={traj.failure.time:.6g}: "
              f"{traj.failure.kind}: {traj.failure.message}", file=sys.stderr)
        print(f"partial artifacts written to {out_dir}", file=sys.stderr)
        return _EXIT_RUNTIME
    print(f"run complete: {len(traj.t)} samples over {traj.t[-1]:.6g} s, "
          f"certificate {'all-pass' if cert.all_pass else 'HAS FAILURES'}; "
          f"artifacts in {out_dir}")
    return _EXIT_OK


_SWEEP_HEADER = ("index,overrides,status,tracking_error_final,worst_v_increment,"
                 "safe,sup_p2_hat,sup_theta1_hat,detail")


def _cmd_sweep(args) -> int:
    ec = load_config(args.config)
    out_dir = Path(args.out) if args.out else ec.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, overrides in sweep_rows(ec):
        label = " ".join(f"{k}={v:g}" for k, v in overrides.items())
        try:
            sim = apply_overrides(ec.sim, overrides)
        except (ConfigError, SafeliftError) as exc:
            rows.append(f"{i},{label},invalid-config,,,,,,"
                        f"{str(exc).replace(',', ';')}")
            continue
        traj = run_sim(sim)
        cert = certify(traj, sim, ec.thresholds)
        status = "ok" if traj.completed else "runtime-violation"
        detail = "" if traj.failure is None else \
            f"{traj.failure.kind} at t={traj.failure.time:.6g}".replace(",", ";")
        rows.append(f"{i},{label},{status},{cert.tracking_error_final:.15g},"
                    f"{cert.worst_v_increment:.15g},"
                    f"{'yes' if cert.safe_invariance else 'no'},"
                    f"{cert.sup_p2_hat:.15g},{cert.sup_theta1_hat:.15g},{detail}")
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        fh.write(_SWEEP_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")
    print(f"sweep complete: {len(rows)} rows in {out_dir / 'sweep.csv'}")
    return _EXIT_OK


def _cmd_check_assumptions(args) -> int:
    ec = load_config(args.config)
    report = check_assumptions(ec.sim.plant, ec.sim.safe_set, grid_n=args.grid)
    print(report.summary())
    return _EXIT_OK if report.passed else _EXIT_RUNTIME


def _positive_int(raw: str) -> int:
    val = int(raw)
    if val < 2:
        raise argparse.ArgumentTypeError("grid size must be at least 2")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safelift",
        description="Safe adaptive tracking experiments for box-constrained "
                    "strict-feedback plants")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one closed-loop experiment")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides the config)")
    p_run.add_argument("--svg", action="store_true", help="also render SVG plots")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the configured parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", help="output directory (overrides the config)")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_chk = sub.add_parser("check-assumptions",
                           help="grid-check the plant structural assumptions")
    p_chk.add_argument("config")
    p_chk.add_argument("--grid", type=_positive_int, default=21,
                       help="samples per axis (default 21)")
    p_chk.set_defaults(fn=_cmd_check_assumptions)

    p_ver = sub.add_parser("version", help="print the package version")
    p_ver.set_defaults(fn=lambda args: (print(f"safelift {_package_version()}"),
                                        _EXIT_OK)[1])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except SafeliftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
