"""JSON run configuration: defaults, strict validation, echo, and hashing.

Unknown keys are rejected with their dotted path so typos cannot silently
fall back to defaults.  Every run echoes the fully materialized config
(defaults filled in) and a sha256 hash of its canonical JSON form; the hash
goes into every output header so data files are traceable to their inputs.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math

from .device import (DEFAULT_CAPACITANCE_FF, DEFAULT_INDUCTANCE_PH,
                     DEFAULT_SPLITTING_GHZ, DeviceParams)
from .ensemble import DEFAULT_N_MEMBERS
from .errors import ConfigError
from .evolution import (DEFAULT_DT_NS, DEFAULT_INITIAL_OFFSET_UPHI0,
                        DEFAULT_N_STEPS, PropagationConfig)
from .noise import CHANNEL_FLUX, CHANNEL_CRITICAL_CURRENT, NoiseSpec
from .spectrum import (DEFAULT_HALF_WIDTH, DEFAULT_N_LEVELS, DEFAULT_N_POINTS,
                       DEFAULT_TABLE_STEP_UPHI0, BasisTable, FluxGrid,
                       build_basis_table, calibrate_critical_current)

DEFAULTS: dict = {
    "device": {
        "inductance_ph": DEFAULT_INDUCTANCE_PH,
        "capacitance_ff": DEFAULT_CAPACITANCE_FF,
        # null means calibrate the junction to calibrate_to_ghz
        "critical_current_ua": None,
        "calibrate_to_ghz": DEFAULT_SPLITTING_GHZ,
        # interpret calibrate_to_ghz as an angular splitting in rad/ns
        # instead of an oscillation frequency omega0/2pi
        "target_is_angular": False,
        # drop the junction term entirely (oscillator test mode)
        "harmonic": False,
    },
    "grid": {
        "n_points": DEFAULT_N_POINTS,
        "half_width": DEFAULT_HALF_WIDTH,
    },
    "table": {
        "step_microphi0": DEFAULT_TABLE_STEP_UPHI0,
        "n_levels": DEFAULT_N_LEVELS,
        # null means six sigma of the largest configured noise amplitude
        "half_range_microphi0": None,
        "ic_scales": None,
    },
    "propagation": {
        "dt_ns": DEFAULT_DT_NS,
        "n_steps": DEFAULT_N_STEPS,
        "initial_offset_microphi0": DEFAULT_INITIAL_OFFSET_UPHI0,
    },
    "noise": {
        "sigma_std_microphi0": 6.0,
        "cutoff_ghz": 4.0,          # ordinary frequency; omega_c = 2 pi f
        "channel": CHANNEL_FLUX,
    },
    "ensemble": {
        "n_members": DEFAULT_N_MEMBERS,
    },
    "sweep": {
        "mode": "variance",
        "sigmas_microphi0": [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0],
        "cutoffs_ghz": [1.0, 2.0, 4.0],
        "hold": "psd",
        "sigma_ref_microphi0": 6.0,
        # null means reference the zero-noise splitting
        "omega_ref_ghz": None,
    },
    "coupling": {
        "mutual_fh": 10.0,
        "current_ua": 150.0,
        "target_rate_per_ns": 0.05,
        "rate_coefficient": None,   # null means the reference quadratic law
        "rate_exponent": None,
    },
    "master_seed": 0,
    "out_dir": ".",
}

# keys whose default is None, with the JSON types they accept when set
_NULLABLE_TYPES = {
    "device.critical_current_ua": (float, int),
    "table.half_range_microphi0": (float, int),
    "table.ic_scales": (list,),
    "sweep.omega_ref_ghz": (float, int),
    "coupling.rate_coefficient": (float, int),
    "coupling.rate_exponent": (float, int),
}


def _check(user, defaults, path=""):
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {here}")
        ref = defaults[key]
        if isinstance(ref, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here} must be an object")
            _check(value, ref, here)
            continue
        if value is None:
            if here in _NULLABLE_TYPES or ref is None:
                continue
            raise ConfigError(f"{here} may not be null")
        if ref is None:
            allowed = _NULLABLE_TYPES.get(here, (object,))
            if not isinstance(value, allowed):
                raise ConfigError(f"{here} has the wrong type")
            continue
        if isinstance(ref, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{here} must be a boolean")
        elif isinstance(ref, (int, float)):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{here} must be a number")
        elif isinstance(ref, str):
            if not isinstance(value, str):
                raise ConfigError(f"{here} must be a string")
        elif isinstance(ref, list):
            if not isinstance(value, list):
                raise ConfigError(f"{here} must be a list")


def _merge(user, defaults):
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(value, out[key])
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: str | None = None,
                overrides: dict | None = None) -> dict:
    """Read, validate and materialize a run config.

    path None means pure defaults.  overrides is a flat {dotted.key: value}
    map applied after the file (used for CLI flags); overridden keys must
    exist in the schema.
    """
    user: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
    _check(user, DEFAULTS)
    config = _merge(user, DEFAULTS)
    for dotted, value in (overrides or {}).items():
        node = config
        *parents, leaf = dotted.split(".")
        for part in parents:
            node = node[part]
        if leaf not in node:
            raise ConfigError(f"unknown override key: {dotted}")
        node[leaf] = value
    return config


def canonical_json(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON echo; stamped into output headers."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def build_grid(config: dict) -> FluxGrid:
    g = config["grid"]
    n = int(g["n_points"])
    # production grids must be odd (exact centre point) and fine enough
    if n < 501 or n % 2 == 0:
        raise ConfigError(f"grid.n_points must be an odd integer >= 501, got {n}")
    return FluxGrid(n_points=n, half_width=float(g["half_width"]))


def build_device(config: dict, grid: FluxGrid) -> DeviceParams:
    """Device from the config, calibrating the junction when I_c is null."""
    d = config["device"]
    if d["harmonic"]:
        return DeviceParams.from_lab(d["inductance_ph"], d["capacitance_ff"],
                                     critical_current_ua=0.0)
    if d["critical_current_ua"] is not None:
        return DeviceParams.from_lab(d["inductance_ph"], d["capacitance_ff"],
                                     d["critical_current_ua"])
    value = float(d["calibrate_to_ghz"])
    target = value if d["target_is_angular"] else 2 * math.pi * value
    result = calibrate_critical_current(
        d["inductance_ph"] * 1e-12, d["capacitance_ff"] * 1e-15,
        grid=grid, target_splitting=target)
    return result.params


def max_sigma_microphi0(config: dict) -> float:
    """Largest flux-noise amplitude any configured run can request."""
    sigmas = [float(config["noise"]["sigma_std_microphi0"])]
    sweep = config["sweep"]
    if sweep["mode"] == "variance":
        sigmas += [float(s) for s in sweep["sigmas_microphi0"]]
    else:
        ref = float(sweep["sigma_ref_microphi0"])
        if sweep["hold"] == "psd":
            omega_ref = sweep["omega_ref_ghz"]
            cutoffs = [float(c) for c in sweep["cutoffs_ghz"]]
            if omega_ref is not None and cutoffs:
                scale = math.sqrt(max(cutoffs) / float(omega_ref))
                sigmas.append(ref * max(scale, 1.0))
            else:
                # splitting not known here; six is a generous cushion
                sigmas.append(ref * 6.0)
        else:
            sigmas.append(ref)
    return max(sigmas)


def build_table(config: dict, params: DeviceParams, grid: FluxGrid,
                sigma_max_uphi0: float | None = None) -> BasisTable:
    """Basis table sized for the run at hand.

    When table.half_range_microphi0 is null the range is six sigma of
    sigma_max_uphi0 (or, if that is not given, of the largest amplitude any
    configured command could use), floored at one bias step.
    """
    t = config["table"]
    half_range = t["half_range_microphi0"]
    if half_range is None:
        step = float(t["step_microphi0"])
        if sigma_max_uphi0 is None:
            sigma_max_uphi0 = max_sigma_microphi0(config)
        half_range = max(6.0 * float(sigma_max_uphi0), step)
    scales = t["ic_scales"]
    return build_basis_table(params, grid,
                             half_range_uphi0=float(half_range),
                             step_uphi0=float(t["step_microphi0"]),
                             n_levels=int(t["n_levels"]),
                             ic_scales=None if scales is None
                             else [float(s) for s in scales])


def build_propagation(config: dict) -> PropagationConfig:
    p = config["propagation"]
    return PropagationConfig(
        dt=float(p["dt_ns"]), n_steps=int(p["n_steps"]),
        initial_offset_uphi0=float(p["initial_offset_microphi0"]))


def build_noise(config: dict) -> NoiseSpec:
    n = config["noise"]
    p = config["propagation"]
    channel = n["channel"]
    if channel not in (CHANNEL_FLUX, CHANNEL_CRITICAL_CURRENT):
        raise ConfigError(f"noise.channel must be '{CHANNEL_FLUX}' or "
                          f"'{CHANNEL_CRITICAL_CURRENT}'")
    return NoiseSpec(sigma=float(n["sigma_std_microphi0"]),
                     cutoff=2 * math.pi * float(n["cutoff_ghz"]),
                     dt=float(p["dt_ns"]), n_steps=int(p["n_steps"]),
                     channel=channel)
