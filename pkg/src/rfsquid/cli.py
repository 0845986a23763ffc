"""Command-line interface: config ingestion, run orchestration, data export.

Subcommands: spectrum | evolve | sweep | coupling | dump-table.  All data
files are CSV or JSON, begin with a comment header carrying the tool
version, config hash, master seed and units, and are byte-identical when a
command is repeated with the same config and seed, whatever the worker
count.  Exit codes: 0 success, 2 config error, 3 numerical failure,
4 leakage or clamp budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import (FitResult, bandwidth_sweep, fit_damped_cosine,
                       variance_sweep)
from .config import (build_device, build_grid, build_noise, build_propagation,
                     build_table, config_hash, load_config)
from .coupling import (DEFAULT_RATE_COEFFICIENT, DEFAULT_RATE_EXPONENT,
                       dephasing_rate, mutual_inductance_threshold,
                       pulse_flux_uphi0)
from .ensemble import EnsembleConfig, run_ensemble
from .errors import (ClampBudgetExceeded, ConfigError, FitDiverged,
                     InsufficientPeriods, LeakageBudgetExceeded,
                     NoFitAvailable, SimulationError)
from .evolution import prepare_initial_state
from .noise import CHANNEL_FLUX, NoiseSpec
from .spectrum import solve_eigenbasis

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_BUDGET = 4


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _header(config: dict, units: str) -> list[str]:
    return [f"# tool: rfsquid {__version__}",
            f"# config_hash: {config_hash(config)}",
            f"# master_seed: {config['master_seed']}",
            f"# units: {units}"]


def _write_csv(path: str, comments: list[str], columns: list[str], rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: str, config: dict, payload: dict):
    body = {"tool": f"rfsquid {__version__}",
            "config_hash": config_hash(config),
            "master_seed": config["master_seed"],
            "config": config}
    body.update(payload)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _fit_payload(fit: FitResult) -> dict:
    return {"amplitude": fit.amplitude, "d_phi_per_ns": fit.rate,
            "d_phi_ci": fit.rate_ci, "omega0_rad_per_ns": fit.frequency,
            "omega0_ci": fit.frequency_ci, "phase_rad": fit.phase,
            "residual_rms": fit.residual_rms, "converged": fit.converged}


def cmd_spectrum(config: dict, out_dir: str, args) -> int:
    grid = build_grid(config)
    params = build_device(config, grid)
    n_levels = int(config["table"]["n_levels"])
    basis = solve_eigenbasis(params, grid, n_levels=n_levels)

    _write_csv(os.path.join(out_dir, "spectrum_levels.csv"),
               _header(config, "energy rad/ns"),
               ["level", "energy_rad_per_ns"],
               [(i, e) for i, e in enumerate(basis.energies)])
    _write_csv(os.path.join(out_dir, "spectrum_vectors.csv"),
               _header(config, "flux Phi0; psi 1/sqrt(Phi0)"),
               ["flux_phi0"] + [f"psi_{i}" for i in range(n_levels)],
               [(phi, *basis.vectors[j]) for j, phi in
                enumerate(grid.points)])

    splitting = basis.splitting
    payload = {
        "device": params.in_lab_units(),
        "beta_l": params.beta_l,
        "harmonic": bool(config["device"]["harmonic"]),
        "energies_rad_per_ns": list(basis.energies),
        "splitting_rad_per_ns": splitting,
        "omega0_ghz": splitting / (2 * math.pi),
        "calibrated": config["device"]["critical_current_ua"] is None
        and not config["device"]["harmonic"],
    }
    if config["device"]["harmonic"]:
        payload["oscillator_freq_rad_per_ns"] = 1e-9 / math.sqrt(
            params.inductance * params.capacitance)
    _write_json(os.path.join(out_dir, "spectrum_summary.json"), config,
                payload)
    print(f"spectrum: omega0/2pi = {payload['omega0_ghz']:.4f} GHz, "
          f"beta_L = {params.beta_l:.4f}")
    return EXIT_OK


def cmd_evolve(config: dict, out_dir: str, args) -> int:
    grid = build_grid(config)
    params = build_device(config, grid)
    spec = build_noise(config)
    is_flux = spec.channel == CHANNEL_FLUX
    table = build_table(config, params, grid,
                        sigma_max_uphi0=spec.sigma if is_flux else 0.0)
    prop = build_propagation(config)
    ens_cfg = EnsembleConfig(n_members=int(config["ensemble"]["n_members"]),
                             master_seed=int(config["master_seed"]),
                             workers=args.workers)
    initial = prepare_initial_state(params, table, prop.initial_offset_uphi0)
    if is_flux:
        flux_spec, ic_spec = spec, None
    else:
        flux_spec = NoiseSpec(0.0, spec.cutoff, spec.dt, spec.n_steps)
        ic_spec = spec
    result = run_ensemble(initial, table, prop, flux_spec, ens_cfg,
                          ic_spec=ic_spec,
                          keep_trajectories=args.debug_trajectories)

    _write_csv(os.path.join(out_dir, "evolve_trace.csv"),
               _header(config, "t ns; P, rho dimensionless"),
               ["t_ns", "P_mean", "re_rho01", "im_rho01", "rho00",
                "leakage_mean"],
               [(t, p, r01.real, r01.imag, r00, lk) for t, p, r01, r00, lk
                in zip(result.times, result.p, result.rho[:, 0, 1],
                       result.rho[:, 0, 0].real, result.leakage_mean)])

    try:
        fit = fit_damped_cosine(result.times, result.p)
    except (FitDiverged, InsufficientPeriods):
        fit = FitResult.failed(float(np.sqrt(np.mean(result.p**2))),
                               len(result.p))
    payload = {
        "n_members": ens_cfg.n_members,
        "zero_noise_splitting_rad_per_ns": table.delta,
        "fit": _fit_payload(fit),
        "leakage_total_max": float(result.leakage_totals.max()),
        "clamped_steps_total": int(result.clamped_steps.sum()),
        "min_mean_two_level_weight": float(result.mean_weight.min()),
    }
    _write_json(os.path.join(out_dir, "evolve_summary.json"), config, payload)

    if args.debug_trajectories:
        n_levels = table.n_levels
        for i, traj in enumerate(result.trajectories):
            _write_csv(os.path.join(out_dir, f"trajectory_{i:03d}.csv"),
                       _header(config, "t ns; P, populations dimensionless"),
                       ["t_ns", "P"] + [f"pop_{k}" for k in range(n_levels)],
                       [(t, p, *pops) for t, p, pops in
                        zip(traj.times, traj.p, traj.populations)])
    print(f"evolve: {ens_cfg.n_members} members, "
          f"D_phi = {fit.rate if fit.converged else float('nan'):.3e} /ns")
    return EXIT_OK


def cmd_sweep(config: dict, out_dir: str, args) -> int:
    grid = build_grid(config)
    params = build_device(config, grid)
    prop = build_propagation(config)
    sweep_cfg = config["sweep"]
    mode = sweep_cfg["mode"]
    if mode not in ("variance", "bandwidth"):
        raise ConfigError("sweep.mode must be 'variance' or 'bandwidth'")
    omega0 = solve_eigenbasis(params, grid, n_levels=2).splitting

    if mode == "variance":
        sigmas = [float(s) for s in sweep_cfg["sigmas_microphi0"]]
        if not sigmas:
            raise ConfigError("sweep.sigmas_microphi0 is empty")
        sigma_max = max(sigmas)
        cutoff = 2 * math.pi * float(config["noise"]["cutoff_ghz"])
    else:
        cutoffs = [2 * math.pi * float(c) for c in sweep_cfg["cutoffs_ghz"]]
        if not cutoffs:
            raise ConfigError("sweep.cutoffs_ghz is empty")
        ref_ghz = sweep_cfg["omega_ref_ghz"]
        omega_ref = (2 * math.pi * float(ref_ghz) if ref_ghz is not None
                     else omega0)
        sigma_ref = float(sweep_cfg["sigma_ref_microphi0"])
        sigma_max = sigma_ref * max(1.0, math.sqrt(max(cutoffs) / omega_ref)) \
            if sweep_cfg["hold"] == "psd" else sigma_ref

    table = build_table(config, params, grid, sigma_max_uphi0=sigma_max)
    initial = prepare_initial_state(params, table, prop.initial_offset_uphi0)
    n_members = int(config["ensemble"]["n_members"])
    seed = int(config["master_seed"])

    if mode == "variance":
        sweep = variance_sweep(initial, table, prop, sigmas, cutoff,
                               master_seed=seed, n_members=n_members,
                               workers=args.workers)
    else:
        sweep = bandwidth_sweep(initial, table, prop, cutoffs,
                                sigma_ref=sigma_ref, omega_ref=omega_ref,
                                hold=sweep_cfg["hold"], master_seed=seed,
                                n_members=n_members, workers=args.workers)

    axis = "sigma" if mode == "variance" else "cutoff"
    for row in sweep.rows:
        x = row.sigma if mode == "variance" else row.cutoff
        print(f"sweep {axis} = {x:g}: D_phi = {row.fit.rate:.3e} /ns "
              f"(ci {row.fit.rate_ci:.1e}, converged {row.fit.converged})")

    _write_csv(os.path.join(out_dir, "sweep_rows.csv"),
               _header(config, "sigma uPhi0 / cutoff rad/ns; D_phi 1/ns; "
                               "omega0 rad/ns"),
               ["sigma_or_cutoff", "D_phi", "D_phi_ci", "omega0",
                "omega0_ci", "residual_rms", "converged", "seed"],
               [((r.sigma if mode == "variance" else r.cutoff), r.fit.rate,
                 r.fit.rate_ci, r.fit.frequency, r.fit.frequency_ci,
                 r.fit.residual_rms, r.fit.converged, r.seed)
                for r in sweep.rows])

    payload: dict = {"mode": mode,
                     "zero_noise_splitting_rad_per_ns": omega0}
    try:
        law = sweep.rate_power_law()
        payload["power_law"] = {"exponent": law.exponent,
                                "coefficient": law.prefactor,
                                "exponent_stderr": law.exponent_stderr,
                                "n_rows_used": law.n_used}
    except NoFitAvailable as exc:
        payload["power_law"] = None
        payload["power_law_unavailable"] = str(exc)
    if mode == "bandwidth":
        try:
            lin = sweep.sub_band_linearity(omega0)
            payload["sub_band_linear_fit"] = {"slope": lin.slope,
                                              "intercept": lin.intercept,
                                              "r_squared": lin.r_squared}
        except NoFitAvailable:
            payload["sub_band_linear_fit"] = None
        try:
            payload["super_band_relative_spread"] = \
                sweep.super_band_spread(omega0)
        except NoFitAvailable:
            payload["super_band_relative_spread"] = None
    _write_json(os.path.join(out_dir, "sweep_power_law.json"), config,
                payload)
    return EXIT_OK


def cmd_coupling(config: dict, out_dir: str, args) -> int:
    c = config["coupling"]
    coeff = (float(c["rate_coefficient"]) if c["rate_coefficient"] is not None
             else DEFAULT_RATE_COEFFICIENT)
    exponent = (float(c["rate_exponent"]) if c["rate_exponent"] is not None
                else DEFAULT_RATE_EXPONENT)
    flux = pulse_flux_uphi0(float(c["mutual_fh"]), float(c["current_ua"]))
    rate_at_pulse = dephasing_rate(flux, coeff, exponent)
    target = float(c["target_rate_per_ns"])
    threshold = mutual_inductance_threshold(target, float(c["current_ua"]),
                                            coeff, exponent)
    payload = {
        "pulse_flux_microphi0": flux,
        "dephasing_rate_at_pulse_amplitude_per_ns": rate_at_pulse,
        "target_rate_per_ns": target,
        "target_coherence_ns": 1.0 / target,
        "threshold_mutual_fh": threshold,
        "law": {"coefficient": coeff, "exponent": exponent,
                "source": "config" if c["rate_coefficient"] is not None
                else "reference"},
        # per-pulse amplitude stands in for a stationary noise sigma
        "order_of_magnitude_estimate": True,
    }
    _write_json(os.path.join(out_dir, "coupling_report.json"), config,
                payload)
    print(f"coupling: pulse flux {flux:.1f} uPhi0; "
          f"M threshold {threshold:.4f} fH for 1/D = {1 / target:g} ns")
    return EXIT_OK


def cmd_dump_table(config: dict, out_dir: str, args) -> int:
    grid = build_grid(config)
    params = build_device(config, grid)
    table = build_table(config, params, grid)
    path = os.path.join(out_dir, "basis_table.npz")
    table.save(path)
    rows = []
    for i, scale in enumerate(table.ic_scales):
        for j, bias in enumerate(table.bias_values):
            rows.append((scale, bias, *table.energies[i, j]))
    _write_csv(os.path.join(out_dir, "basis_table_energies.csv"),
               _header(config, "bias Phi0; energy rad/ns"),
               ["ic_scale", "bias_phi0"]
               + [f"e_{k}" for k in range(table.n_levels)], rows)
    _write_json(os.path.join(out_dir, "basis_table_summary.json"), config,
                {"content_key": table.content_key(),
                 "n_bias": table.n_bias, "n_levels": table.n_levels,
                 "bias_step_uphi0": table.bias_step * 1e6,
                 "half_range_uphi0": table.half_range_uphi0,
                 "splitting_rad_per_ns": table.delta})
    print(f"dump-table: {table.n_bias} bias entries -> {path}")
    return EXIT_OK


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "coupling": cmd_coupling,
    "dump-table": cmd_dump_table,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfsquid",
        description="Flux-qubit dephasing simulator: stochastic Schrodinger "
                    "evolution under band-limited Gaussian flux noise.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "eigenvalues/eigenvectors and two-state summary",
        "evolve": "ensemble-averaged coherent oscillations under noise",
        "sweep": "dephasing rate vs noise amplitude or bandwidth",
        "coupling": "control-line flux and mutual-inductance threshold",
        "dump-table": "export the precomputed eigenbasis table",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH",
                       help="JSON run configuration (defaults if omitted)")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="override master_seed")
        p.add_argument("--workers", type=int, default=os.cpu_count(),
                       metavar="N", help="worker processes (default: all cores)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--debug-trajectories", action="store_true",
                       help="dump one CSV per trajectory (evolve only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = int(args.seed)
    if args.out is not None:
        overrides["out_dir"] = args.out
    try:
        config = load_config(args.config, overrides)
        out_dir = config["out_dir"]
        os.makedirs(out_dir, exist_ok=True)
        return _COMMANDS[args.command](config, out_dir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LeakageBudgetExceeded, ClampBudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
