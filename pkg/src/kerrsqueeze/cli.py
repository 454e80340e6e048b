"""Command-line front end.

    kerrsqueeze {evolve|protocol|sweep|reconstruct} --config FILE
                [--out DIR] [--workers N] [--seed S]

Exit codes: 0 success; 2 config or schema error; 3 the per-command
documented fault (numerical fault for ``evolve``, under-determined
reconstruction for ``reconstruct``); 4 any other numerical fault.  Every run
writes a ``manifest.json`` listing the emitted files with SHA-256 checksums;
reruns of the same config produce identical file checksums.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    GridSpec,
    default_grid_spec,
    fit_2d_wigner,
    best_fit_squeezed_vacuum,
    mle_reconstruct,
    wigner,
)
from .config import (
    ConfigError,
    drive_from_config,
    jc_from_config,
    load_config,
    oscillator_from_config,
    parse_complex,
    state_from_config,
)
from .errors import (
    IntegratorError,
    KerrSqueezeError,
    TruncationFault,
    UnderDeterminedError,
)
from .evolve import trajectory
from .fockcore import (
    DensityMatrix,
    QuantumState,
    fidelity,
    ladder_operators,
    number_operator,
    OperatorMatrix,
)
from .hamiltonian import build_driven_kerr
from .protocol import TrotterConfig, run_cyclic_squeeze, run_trotter_squeeze
from .sweep import (
    optimize_detuning,
    scan_decay,
    scan_drive_params,
    scan_qubit_excitation,
    scan_trotter_dt,
    squeeze_level_from_cuts,
    write_table,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMMAND_FAULT = 3
EXIT_NUMERICAL = 4


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, config_raw: dict, seed, files: list[Path]) -> None:
    manifest = {
        "tool_version": __version__,
        "config_sha256": hashlib.sha256(
            json.dumps(config_raw, sort_keys=True).encode()).hexdigest(),
        "seed": seed,
        "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "files": [{"name": f.name, "sha256": _sha256(f),
                   "bytes": f.stat().st_size} for f in sorted(files)],
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


def _observable_map(names, dim):
    a, ad = ladder_operators(dim)
    known = {
        "n": number_operator(dim),
        "re_a": OperatorMatrix(0.5 * (a.elements + ad.elements), dim,
                               hermitian_flag=True),
        "im_a": OperatorMatrix(-0.5j * (a.elements - ad.elements), dim,
                               hermitian_flag=True),
        "parity": OperatorMatrix(np.diag((-1.0) ** np.arange(dim)).astype(complex),
                                 dim, hermitian_flag=True),
    }
    out = {}
    for name in names:
        if name not in known:
            raise ConfigError(f"unknown observable {name!r}")
        out[name] = known[name]
    return out


def cmd_evolve(cfg: dict, out_dir: Path, workers: int, seed) -> list[Path]:
    if "evolution" not in cfg:
        raise ConfigError("evolve command needs an 'evolution' block")
    ev = cfg["evolution"]
    for key in ("dim", "t_total_us", "sample_dt_us"):
        if key not in ev:
            raise ConfigError(f"evolution.{key} is required")
    dim = ev["dim"]
    osc = oscillator_from_config(cfg.get("oscillator", {}))
    drive = drive_from_config(cfg.get("drive", {}))
    H = build_driven_kerr(osc, drive, dim)
    psi0 = state_from_config(ev.get("initial_state", {}), dim)
    names = ev.get("observables", ["n", "re_a", "im_a"])
    for required in ("n", "re_a", "im_a"):
        if required not in names:
            names = list(names) + [required]
    obs = _observable_map(names, dim)
    res = trajectory([(H, float(ev["t_total_us"]))], psi0,
                     float(ev["sample_dt_us"]), obs)
    path = out_dir / "trajectory.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "re_alpha", "im_alpha", "n", "leakage"])
        for i, t in enumerate(res.times):
            wr.writerow([f"{t:.17g}",
                         f"{res.expectations['re_a'][i]:.17g}",
                         f"{res.expectations['im_a'][i]:.17g}",
                         f"{res.expectations['n'][i]:.17g}",
                         f"{res.leakage[i]:.17g}"])
    return [path]


def cmd_protocol(cfg: dict, out_dir: Path, workers: int, seed) -> list[Path]:
    if "protocol" not in cfg:
        raise ConfigError("protocol command needs a 'protocol' block")
    pr = cfg["protocol"]
    name = pr.get("name")
    if name not in ("cyclic", "trotter"):
        raise ConfigError(f"protocol.name must be cyclic or trotter, got {name!r}")
    osc = oscillator_from_config(cfg.get("oscillator", {}))
    files: list[Path] = []
    fits = []
    wig_cfg = pr.get("snapshot_wigner", {})
    every = wig_cfg.get("every", 1)
    n_grid = wig_cfg.get("n", 81)
    n_sigma = wig_cfg.get("n_sigma", 5.0)
    fit_cfg = pr.get("fit", {})

    if name == "cyclic":
        for key in ("dim", "cycles", "cycle_period_us"):
            if key not in pr:
                raise ConfigError(f"protocol.{key} is required for cyclic runs")
        dim = pr["dim"]
        drive = drive_from_config(cfg.get("drive", {}))
        psi0 = state_from_config(pr.get("initial_state", {}), dim)
        beta = parse_complex(pr.get("beta", 2.0), "protocol.beta")
        res = run_cyclic_squeeze(
            osc, drive, beta, pr["cycles"], float(pr["cycle_period_us"]),
            psi0, refine_ends=pr.get("refine_ends", True),
            rotation=pr.get("rotation", "calibrated"),
            lindblad=pr.get("lindblad", False),
            dt_max=float(pr.get("dt_max_us", 0.002)))
        method = fit_cfg.get("method", "fit2d")
        hint = fit_cfg.get("n_fock_hint", 0)
        snapshots = res.snapshots if res.snapshots else (psi0,)
        labels = list(range(1, len(res.snapshots) + 1)) if res.snapshots else [0]
        for label, snap in zip(labels, snapshots):
            entry = {"cycle": label,
                     "time_us": res.cycle_times[label - 1] if label else 0.0,
                     "rotation_rad": res.rotations[label - 1] if label else 0.0}
            grid = wigner(snap, default_grid_spec(snap, n=n_grid,
                                                  n_sigma=n_sigma))
            if every and (label % every == 0):
                path = out_dir / f"wigner_cycle_{label:02d}.csv"
                grid.to_csv(path)
                files += [path, Path(str(path) + ".json")]
            fit = fit_2d_wigner(grid, n_fock_hint=hint)
            entry.update(fit.to_json_dict())
            r, phi, f_best = best_fit_squeezed_vacuum(snap)
            entry["fidelity_best_squeezed"] = f_best
            fits.append(entry)
    else:
        if "trotter" not in cfg:
            raise ConfigError("trotter protocol needs a 'trotter' block")
        tr = cfg["trotter"]
        for key in ("beta", "delta_t_us", "steps", "dim"):
            if key not in tr:
                raise ConfigError(f"trotter.{key} is required")
        dim = tr["dim"]
        tcfg = TrotterConfig(
            beta=parse_complex(tr["beta"], "trotter.beta"),
            delta_t=float(tr["delta_t_us"]), steps=tr["steps"],
            order=tr.get("order", 1),
            detuning=float(tr.get("detuning_mhz", 0.0)),
            displacement_duration=float(tr.get("displacement_duration_us", 0.0)))
        psi0 = state_from_config(pr.get("initial_state", {}), dim)
        res = run_trotter_squeeze(osc, tcfg, psi0)
        for k, snap in enumerate(res.snapshots, start=1):
            entry = {"step": k, "time_us": res.step_times[k - 1]}
            if every and (k % every == 0):
                grid = wigner(snap, default_grid_spec(snap, n=n_grid,
                                                      n_sigma=n_sigma))
                path = out_dir / f"wigner_step_{k:02d}.csv"
                grid.to_csv(path)
                files += [path, Path(str(path) + ".json")]
            xi_fit, theta = squeeze_level_from_cuts(snap)
            entry.update({"xi_abs": xi_fit,
                          "level_db": 8.685889638065037 * xi_fit,
                          "rotation_rad": theta})
            fits.append(entry)
    fits_path = out_dir / "fits.json"
    with open(fits_path, "w") as fh:
        json.dump({"protocol": name, "snapshots": fits}, fh, indent=1,
                  sort_keys=True)
    files.append(fits_path)
    return files


def cmd_sweep(cfg: dict, out_dir: Path, workers: int, seed) -> list[Path]:
    if "sweep" not in cfg:
        raise ConfigError("sweep command needs a 'sweep' block")
    sw = cfg["sweep"]
    kind = sw.get("kind")
    osc = oscillator_from_config(cfg.get("oscillator", {}))
    t0 = time.time()
    if kind == "drive_params":
        records = scan_drive_params(
            sw.get("delta_grid_mhz", []), sw.get("omega_grid_mhz", []),
            osc, parse_complex(sw.get("beta", 2.0), "sweep.beta"),
            sw.get("cycles", 6), dim=sw.get("dim", 240), workers=workers)
    elif kind == "decay":
        drive = drive_from_config(cfg.get("drive", {}))
        if "period_us" not in sw:
            raise ConfigError("sweep.period_us is required for decay scans")
        records = scan_decay(
            sw.get("ratio_grid", []), osc, drive,
            parse_complex(sw.get("beta", 2.0), "sweep.beta"),
            sw.get("cycles", 4), float(sw["period_us"]),
            dim=sw.get("dim", 200), dt_max=float(sw.get("dt_max_us", 0.002)),
            workers=workers)
    elif kind == "trotter_dt":
        records = scan_trotter_dt(
            sw.get("dt_grid_us", []), float(sw.get("total_time_us", 0.96)),
            parse_complex(sw.get("beta", 8.0), "sweep.beta"), osc,
            float(sw.get("detuning_mhz", 0.0)),
            displacement_duration=float(sw.get("displacement_duration_us", 0.0)),
            dim=sw.get("dim", 180), workers=workers)
    elif kind == "detuning":
        records = optimize_detuning(
            sw.get("beta_sq_grid", []), osc, float(sw.get("delta_t_us", 0.08)),
            sw.get("steps", 14), dim=sw.get("dim", 0), workers=workers)
    elif kind == "qubit_excitation":
        if "jc" not in sw:
            raise ConfigError("sweep.jc block is required for qubit_excitation")
        records = scan_qubit_excitation(
            jc_from_config(sw["jc"]), sw.get("beta_sq_grid", []),
            sw.get("steps", 10), dt=float(sw.get("delta_t_us", 0.08)),
            cavity_dim=sw.get("cavity_dim", 0), workers=workers)
    else:
        raise ConfigError(f"unknown sweep.kind {kind!r}")
    path = out_dir / "sweep.csv"
    meta = {
        "sweep_kind": kind,
        "config_sha256": hashlib.sha256(
            json.dumps(cfg, sort_keys=True).encode()).hexdigest(),
        "tool_version": __version__,
        "wall_time_s": time.time() - t0,
    }
    write_table(records, path, meta=meta)
    return [path, Path(str(path) + ".json")]


def cmd_reconstruct(cfg: dict, out_dir: Path, workers: int, seed) -> list[Path]:
    if "reconstruct" not in cfg:
        raise ConfigError("reconstruct command needs a 'reconstruct' block")
    rc = cfg["reconstruct"]
    for key in ("input_csv", "dim"):
        if key not in rc:
            raise ConfigError(f"reconstruct.{key} is required")
    from .analysis import WignerGrid
    from .errors import InvalidParameterError
    try:
        grid = WignerGrid.from_csv(rc["input_csv"])
    except (InvalidParameterError, OSError, ValueError) as exc:
        raise ConfigError(f"bad Wigner CSV: {exc}") from exc
    dim = rc["dim"]
    samples = []
    for i, x in enumerate(grid.x_values):
        for j, p in enumerate(grid.p_values):
            samples.append((complex(x, p), float(grid.values[i, j])))
    sigma = float(rc.get("noise_sigma", 0.0))
    if sigma > 0:
        rng = np.random.default_rng(seed if seed is not None else 0)
        samples = [(a, v + rng.normal(0.0, sigma)) for a, v in samples]
    rho, trace = mle_reconstruct(samples, dim, iters=rc.get("iters", 300),
                                 tol=float(rc.get("tol", 1e-12)),
                                 sigma=sigma if sigma > 0 else 1.0,
                                 return_trace=True)
    rho_path = out_dir / "rho.json"
    with open(rho_path, "w") as fh:
        json.dump({"dim": dim,
                   "re": [[float(v) for v in row] for row in rho.elements.real],
                   "im": [[float(v) for v in row] for row in rho.elements.imag]},
                  fh)
    report = {
        "trace": float(np.trace(rho.elements).real),
        "min_eigenvalue": rho.min_eigenvalue(),
        "n_samples": len(samples),
        "iterations": len(trace),
        "final_log_likelihood": trace[-1],
    }
    if "reference" in rc:
        ref = state_from_config(rc["reference"], dim, "reconstruct.reference")
        report["fidelity_vs_reference"] = fidelity(ref, rho)
    report_path = out_dir / "reconstruct_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    return [rho_path, report_path]


_COMMANDS = {
    "evolve": cmd_evolve,
    "protocol": cmd_protocol,
    "sweep": cmd_sweep,
    "reconstruct": cmd_reconstruct,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kerrsqueeze",
        description="Driven-Kerr squeezing simulator and analysis toolkit")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out if args.out is not None
                   else cfg.get("output", {}).get("directory", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.get("seed")

    try:
        files = _COMMANDS[args.command](cfg, out_dir, args.workers, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnderDeterminedError as exc:
        print(f"under-determined: {exc}", file=sys.stderr)
        return EXIT_COMMAND_FAULT
    except (TruncationFault, IntegratorError) as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return EXIT_COMMAND_FAULT if args.command == "evolve" else EXIT_NUMERICAL
    except KerrSqueezeError as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write_manifest(out_dir, cfg, seed, files)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
