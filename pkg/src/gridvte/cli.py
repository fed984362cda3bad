"""Command-line harness.

Exit codes: 0 success, 1 numerical failure, 2 validation failure. Failures
also write ``error.json`` into the output directory (or print it to stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from gridvte import __version__
from gridvte import scenario as scn
from gridvte.ansatz import full_hilbert_params, prepare_state
from gridvte.diagonalizer import scenario_hash, threshold_matrix
from gridvte.grid import exact_evolve, mesh, periodic_width
from gridvte.vqte import IntegrationError, TrajectoryRecord, evolve, fit_initial_params, fmt, set_num_threads

EXIT_OK, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2
THREADS_ENV = "GRIDVTE_NUM_THREADS"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _error(kind: str, message: str, field: str | None = None, out: Path | None = None) -> dict:
    payload = {"status": "error", "kind": kind, "message": message}
    if field is not None:
        payload["field"] = field
    text = json.dumps(payload, indent=2) + "\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write_atomic(out / "error.json", text)
    sys.stderr.write(text)
    return payload


# --- run ----------------------------------------------------------------------------


def _manifest(sc: scn.Scenario, ansatz, diags, theta0, fit_info: dict, rec: TrajectoryRecord | None, wall: float) -> dict:
    ev = sc.evolution
    solver = type(ev.solver).__name__
    diag_info = [
        {"source": d.source, "cut": d.cut, "dimension": i, "cnot_estimate": d.cnot_estimate}
        for i, d in enumerate(diags)
    ]
    return {
        "name": sc.name,
        "description": sc.description,
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": sc.raw,
        "scenario_hash": scenario_hash(sc.raw),
        "grid": {
            "num_dims": sc.grid.num_dims,
            "qubits_per_dim": sc.grid.qubits_per_dim,
            "length": list(sc.grid.length),
            "origin": list(sc.grid.origin),
            "spacing": list(sc.grid.spacing),
        },
        "potential": {"kind": sc.potential.kind, "coeffs": list(sc.potential.coeffs)},
        "mass": sc.mass,
        "wavepacket": {"x0": list(sc.wavepacket.x0), "p0": list(sc.wavepacket.p0), "width": list(sc.wavepacket.width)},
        "ansatz": ansatz.descriptor(),
        "n_params": ansatz.num_params,
        "n_params_full": full_hilbert_params(sc.grid.num_qubits),
        "diagonalizers": diag_info,
        "initial": {**fit_info, "theta0": [float(v) for v in theta0]},
        "evolution": {
            "t_total": ev.t_total,
            "solver": solver,
            "step": getattr(ev.solver, "step", None),
            "rtol": ev.rtol,
            "atol": ev.atol,
            "max_step": ev.max_step,
            "epsilon": ev.epsilon,
            "rcond": ev.rcond,
            "derivative": ev.derivative,
            "estimator": asdict(ev.estimator) | {"kind": type(ev.estimator).__name__},
            "rng_seed": ev.rng_seed,
            "record_points": len(ev.record_times),
        },
        "solver_stats": {k: v for k, v in (rec.solver_stats if rec else {}).items() if k != "wall_time_s"},
        "wall_time_s": wall,
    }


def _initial_theta(sc: scn.Scenario, ansatz, psi0: np.ndarray) -> tuple[np.ndarray, dict]:
    init = sc.initial
    if init.mode == "embedded":
        theta = np.array(init.theta)
        achieved = float(abs(np.vdot(psi0, prepare_state(ansatz, theta))) ** 2)
        return theta, {"mode": "embedded", "seed": init.seed, "fidelity": achieved, "reached": achieved >= init.threshold}
    res = fit_initial_params(ansatz, psi0, init.threshold, init.restarts, init.seed, init.max_iter)
    return res.theta, {
        "mode": "fit",
        "seed": init.seed,
        "fidelity": res.fidelity,
        "reached": res.reached,
        "restart": res.restart,
        "iterations": res.iterations,
    }


def _snapshot_rows(sc: scn.Scenario, exact: np.ndarray, vte: np.ndarray):
    coords = mesh(sc.grid)
    pe, pv = np.abs(exact) ** 2, np.abs(vte) ** 2
    for i in range(sc.grid.size):
        yield [c[i] for c in coords] + [pe[i], pv[i]]


def run_one(sc: scn.Scenario, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    ham = sc.hamiltonian()
    psi0 = sc.initial_state()
    ansatz, diags = sc.build_ansatz(ham)
    theta0, fit_info = _initial_theta(sc, ansatz, psi0)
    status, rec, message = EXIT_OK, None, None
    try:
        rec = evolve(ansatz, ham, theta0, sc.evolution, psi0)
    except IntegrationError as exc:
        status, rec, message = EXIT_NUMERIC, exc.partial, str(exc)
    wall = time.perf_counter() - start
    if rec is not None and sc.outputs.trajectory:
        _write_atomic(out / "trajectory.csv", rec.to_csv())
    if rec is not None and sc.outputs.snapshots:
        times = list(rec.times)
        for t in sc.outputs.snapshots:
            if t not in times:
                continue
            i = times.index(t)
            exact = exact_evolve(ham, psi0, t)
            vte = prepare_state(ansatz, rec.thetas[i])
            axes = ["x", "y", "z"][: sc.grid.num_dims] if sc.grid.num_dims <= 3 else [f"x{d}" for d in range(sc.grid.num_dims)]
            _write_atomic(out / f"snapshot_t{t:.4f}.csv", _csv(axes + ["prob_exact", "prob_vte"], _snapshot_rows(sc, exact, vte)))
    if sc.outputs.density_cuts and sc.grid.num_dims == 1:
        _write_atomic(out / "density.csv", density_table(sc, sc.outputs.density_cuts))
    manifest = _manifest(sc, ansatz, diags, theta0, fit_info, rec, wall)
    manifest["status"] = "ok" if status == EXIT_OK else "integration_failed"
    if rec is not None:
        manifest["min_fidelity"] = float(rec.fidelities.min())
        manifest["mean_fidelity"] = float(rec.fidelities.mean())
    _write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, default=float) + "\n")
    if status != EXIT_OK:
        _error("numerical", message or "integration failed", out=out)
    return status


# --- reports ---------------------------------------------------------------------------


def density_table(sc: scn.Scenario, cuts) -> str:
    if sc.grid.num_dims != 1:
        raise scn.ConfigError("grid.num_dims", "density report needs a one-dimensional scenario")
    h = sc.hamiltonian().matrix()
    rows = [(c, threshold_matrix(h, c)[1]) for c in cuts]
    return _csv(["cut", "density"], rows)


def width_rows(members: list[scn.Scenario]):
    for sc in members:
        if sc.potential.kind != "free":
            raise scn.ConfigError(f"{sc.name}.potential.kind", "width report needs free-particle scenarios")
        if sc.grid.num_dims != 1:
            raise scn.ConfigError(f"{sc.name}.grid.num_dims", "width report needs one dimension")
        ham = sc.hamiltonian()
        psi0 = sc.initial_state()
        w0 = periodic_width(sc.grid, psi0)
        w1 = periodic_width(sc.grid, exact_evolve(ham, psi0, sc.evolution.t_total))
        yield [sc.wavepacket.width[0], w0, w1, w1 - w0]


# --- commands ----------------------------------------------------------------------------


def _apply_overrides(sc: scn.Scenario, args) -> scn.Scenario:
    ev = sc.evolution
    if args.seed is not None:
        ev = replace(ev, rng_seed=args.seed)
        if sc.initial.mode == "fit":
            sc.initial = replace(sc.initial, seed=args.seed)
    if args.estimator is not None:
        ev = replace(ev, estimator=scn.parse_estimator(args.estimator))
    sc.evolution = ev
    return sc


def cmd_run(args) -> int:
    out = Path(args.out)
    try:
        cfg = scn.load(args.config)
        members = cfg.members if isinstance(cfg, scn.Batch) else [cfg]
        members = [_apply_overrides(m, args) for m in members]
    except scn.ConfigError as exc:
        _error("validation", exc.message, exc.field, out)
        return EXIT_VALIDATION
    except ValueError as exc:
        _error("validation", str(exc), "estimator", out)
        return EXIT_VALIDATION
    worst = EXIT_OK
    for m in members:
        target = out / m.name if isinstance(cfg, scn.Batch) else out
        code = run_one(m, target)
        worst = max(worst, code)
        fid = ""
        if (target / "manifest.json").is_file():
            man = json.loads((target / "manifest.json").read_text())
            fid = f" min_fidelity={man.get('min_fidelity', float('nan')):.4f}"
        print(f"{m.name}: {'ok' if code == EXIT_OK else 'FAILED'}{fid} -> {target}")
    return worst


def cmd_presets(args) -> int:
    for name, desc in scn.list_presets():
        print(f"{name:32s} {desc}")
    return EXIT_OK


def _parse_cuts(text: str) -> list[float]:
    try:
        cuts = [float(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise scn.ConfigError("cuts", f"cannot parse {text!r}") from None
    if not cuts or any(c < 0 for c in cuts):
        raise scn.ConfigError("cuts", "expected non-negative comma-separated numbers")
    return cuts


def cmd_density(args) -> int:
    try:
        sc = scn.load(args.config)
        if isinstance(sc, scn.Batch):
            raise scn.ConfigError("batch", "density report takes a single scenario")
        text = density_table(sc, _parse_cuts(args.cuts))
    except scn.ConfigError as exc:
        _error("validation", exc.message, exc.field)
        return EXIT_VALIDATION
    _emit(text, args.out)
    return EXIT_OK


def cmd_widths(args) -> int:
    try:
        cfg = scn.load(args.config)
        members = cfg.members if isinstance(cfg, scn.Batch) else [cfg]
        text = _csv(["width_B", "initial_width", "final_width", "difference"], list(width_rows(members)))
    except scn.ConfigError as exc:
        _error("validation", exc.message, exc.field)
        return EXIT_VALIDATION
    _emit(text, args.out)
    return EXIT_OK


def _emit(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        _write_atomic(path, text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridvte", description="Variational time evolution of grid wavepackets.")
    p.add_argument("--version", action="version", version=f"gridvte {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario or batch config")
    r.add_argument("config", help="config file or preset name")
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    r.add_argument("--estimator", default=None, help="exact or shots:N")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("presets", help="list shipped presets")
    s.set_defaults(func=cmd_presets)

    d = sub.add_parser("density", help="nonzero density of the thresholded Hamiltonian")
    d.add_argument("config")
    d.add_argument("--cuts", required=True, help="comma-separated cut values")
    d.add_argument("--out", default=None, help="CSV file (default: stdout)")
    d.set_defaults(func=cmd_density)

    w = sub.add_parser("widths", help="free-particle spread report from the exact propagator")
    w.add_argument("config")
    w.add_argument("--out", default=None, help="CSV file (default: stdout)")
    w.set_defaults(func=cmd_widths)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    threads = os.environ.get(THREADS_ENV)
    if threads:
        try:
            set_num_threads(int(threads))
        except ValueError:
            _error("validation", f"{THREADS_ENV} must be a positive integer", THREADS_ENV)
            return EXIT_VALIDATION
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
