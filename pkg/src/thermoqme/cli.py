"""Command-line interface: `run`, `mu-table`, and `compare`.

Trajectories are written as UTF-8 CSV with a header row and
17-significant-digit scientific notation, so identical configurations
produce byte-identical files.  Exit codes: 0 for a completed run, 2 when a
structure monitor fired (the file still holds the trajectory up to the
violation), 1 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunSetup, build_run, load_config
from .integrator import COMPLETED, Trajectory, simulate
from .two_level import mu, pauli_decompose

log = logging.getLogger("thermoqme")

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_MONITOR_VIOLATION = 2


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def _trajectory_rows(traj: Trajectory, setup: RunSetup):
    """Header and formatted rows for one trajectory."""
    dim = setup.system.dim
    finite = setup.bath.kind == "finite"
    header = ["t"]
    if setup.two_level:
        header += ["m1", "m2", "m3"]
    else:
        for i in range(dim):
            for j in range(i, dim):
                header += [f"rho{i}{j}_re", f"rho{i}{j}_im"]
    if finite:
        header += ["H_e", "T_e"]
    header += ["total_energy", "total_entropy", "min_eig", "trace_err"]

    rows = []
    for point in traj.points[:: setup.stride]:
        row = [_fmt(point.t)]
        if setup.two_level:
            row += [_fmt(v) for v in pauli_decompose(point.rho, tol=1e-6).a]
        else:
            for i in range(dim):
                for j in range(i, dim):
                    row += [_fmt(point.rho[i, j].real), _fmt(point.rho[i, j].imag)]
        if finite:
            row += [_fmt(point.env.H_e), _fmt(point.env.T_e)]
        row += [
            _fmt(point.monitors["total_energy"]),
            _fmt(point.monitors["total_entropy"]),
            _fmt(point.monitors["min_eig"]),
            _fmt(point.monitors["trace_err"]),
        ]
        rows.append(row)
    return header, rows


def _write_csv(path, header, rows) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _run_one(setup: RunSetup, nonlinear: bool) -> Trajectory:
    return simulate(setup.rho0, setup.bath, setup.system, setup.integrator, nonlinear=nonlinear)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        setup = build_run(cfg)
        out_path = args.out or setup.output_path
        if out_path is None:
            raise ConfigError("output.path", "required unless --out is given")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    traj = _run_one(setup, setup.nonlinear)
    header, rows = _trajectory_rows(traj, setup)
    _write_csv(out_path, header, rows)
    if traj.termination != COMPLETED:
        print(f"monitor violation: {traj.violation}", file=sys.stderr)
        print(f"wrote {out_path} (truncated at violation)")
        return EXIT_MONITOR_VIOLATION
    print(f"wrote {out_path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_mu_table(args) -> int:
    if not (0.0 <= args.min < args.max < 1.0):
        print(
            f"configuration error: mu-table range must satisfy 0 <= min < max < 1, "
            f"got [{args.min}, {args.max}]",
            file=sys.stderr,
        )
        return EXIT_CONFIG_ERROR
    if args.steps < 2:
        print("configuration error: steps must be >= 2", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    grid = np.linspace(args.min, args.max, args.steps)
    rows = [[_fmt(m), _fmt(mu(float(m)))] for m in grid]
    _write_csv(args.out, ["m", "mu"], rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        cfg = load_config(args.config)
        setup = build_run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results = {}
    for name, nonlinear in (("nonlinear", True), ("linearized", False)):
        traj = _run_one(setup, nonlinear)
        header, rows = _trajectory_rows(traj, setup)
        _write_csv(out_dir / f"{name}.csv", header, rows)
        results[name] = traj

    nl, lin = results["nonlinear"], results["linearized"]
    n_common = min(len(nl.points), len(lin.points))
    deltas = [
        (p_nl.t, float(np.max(np.abs(p_nl.rho - p_lin.rho))))
        for p_nl, p_lin in zip(nl.points[:n_common], lin.points[:n_common])
    ]
    _write_csv(out_dir / "delta.csv", ["t", "max_abs_delta_rho"], [[_fmt(t), _fmt(d)] for t, d in deltas])

    summary = {
        "nonlinear": {
            "termination": nl.termination,
            "violation": nl.violation,
            "t_final": nl.final.t,
        },
        "linearized": {
            "termination": lin.termination,
            "violation": lin.violation,
            "t_final": lin.final.t,
        },
        "max_abs_delta_rho_final": deltas[-1][1] if deltas else None,
    }
    if setup.two_level:
        consts = setup.system.constants
        x = consts.hbar * cfg.system.omega / (2.0 * consts.kB * setup.bath.temperature())
        m_nl = pauli_decompose(nl.final.rho, tol=1e-6).a
        m_lin = pauli_decompose(lin.final.rho, tol=1e-6).a
        summary["two_level"] = {
            "x": x,
            "nonlinear_final_m3": float(m_nl[2]),
            "linearized_final_m3": float(m_lin[2]),
            "equilibrium_m3": -float(np.tanh(x)),
            "linearized_steady_m3": -x,
            "steady_state_gap": abs(float(np.tanh(x)) - x),
            "linearized_left_bloch_ball": bool(np.linalg.norm(m_lin) > 1.0 + 1e-9)
            or lin.termination != COMPLETED,
        }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"nonlinear:  {nl.termination}" + (f" ({nl.violation})" if nl.violation else ""))
    print(f"linearized: {lin.termination}" + (f" ({lin.violation})" if lin.violation else ""))
    if setup.two_level:
        tl = summary["two_level"]
        print(
            f"steady states: nonlinear m3 -> {tl['nonlinear_final_m3']:.6f} "
            f"(equilibrium {tl['equilibrium_m3']:.6f}), linearized prediction {tl['linearized_steady_m3']:.6f}"
        )
        if tl["linearized_left_bloch_ball"]:
            print("linearized trajectory left the Bloch ball")
    print(f"wrote {out_dir}/nonlinear.csv, linearized.csv, delta.csv, summary.json")
    if nl.termination != COMPLETED or lin.termination != COMPLETED:
        return EXIT_MONITOR_VIOLATION
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("THERMOQME_LOG", "WARNING").upper())
    parser = argparse.ArgumentParser(
        prog="thermoqme",
        description="Simulate the nonlinear thermodynamic quantum master equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configured scenario and write a CSV trajectory")
    p_run.add_argument("--config", required=True, help="path to a JSON configuration")
    p_run.add_argument("--out", help="output CSV path (overrides output.path from the config)")
    p_run.set_defaults(func=cmd_run)

    p_mu = sub.add_parser("mu-table", help="tabulate the nonlinearity strength over a magnetization grid")
    p_mu.add_argument("--min", type=float, required=True)
    p_mu.add_argument("--max", type=float, required=True)
    p_mu.add_argument("--steps", type=int, required=True)
    p_mu.add_argument("--out", required=True)
    p_mu.set_defaults(func=cmd_mu_table)

    p_cmp = sub.add_parser("compare", help="run the nonlinear and linearized variants side by side")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--out-dir", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    args = parser.parse_args(argv)
    return args.func(args)


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
