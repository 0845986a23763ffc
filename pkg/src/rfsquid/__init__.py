"""Dephasing of an rf-SQUID flux qubit under band-limited Gaussian noise.

The package simulates macroscopic quantum coherent oscillations of flux by
integrating the time-dependent Schrodinger equation trajectory by
trajectory: piecewise-constant noise samples shift the flux bias (or the
junction critical current), each interval is propagated exactly in the
instantaneous eigenbasis looked up from a precomputed table, and an
ensemble of realizations is averaged into a reduced two-level density
matrix.  Damped-cosine fits of the averaged coherence give the dephasing
rate; sweep drivers map the rate against noise amplitude and bandwidth,
and a coupling helper turns the fitted law into a mutual-inductance bound
for control circuitry.

Typical use:

    from rfsquid import (default_device, FluxGrid, build_basis_table,
                         prepare_initial_state, PropagationConfig,
                         NoiseSpec, EnsembleConfig, run_ensemble,
                         fit_damped_cosine)

    device = default_device().params
    grid = FluxGrid()
    table = build_basis_table(device, grid, half_range_uphi0=36.0)
    initial = prepare_initial_state(device, table)
    spec = NoiseSpec(sigma=6.0, cutoff=25.13, dt=0.1, n_steps=350)
    result = run_ensemble(initial, table, PropagationConfig(), spec,
                          EnsembleConfig(master_seed=7))
    fit = fit_damped_cosine(result.times, result.p)
"""

__version__ = "0.1.0"

from .analysis import (FitResult, LinearFit, PowerLawFit, SweepResult,
                       SweepRow, bandwidth_sweep, fit_damped_cosine,
                       linear_fit, power_law_fit, relative_spread,
                       variance_sweep)
from .coupling import (CouplingParams, dephasing_rate,
                       mutual_inductance_threshold, pulse_flux,
                       pulse_flux_uphi0, threshold_from_sweep)
from .device import (DeviceParams, HBAR, PHI0, TwoStateParams, WellGeometry,
                     angular_coefficients, extract_two_state, potential,
                     well_geometry)
from .ensemble import (EnsembleConfig, EnsembleResult, derive_seed,
                       reduce_density_matrix, run_ensemble, to_flux_basis)
from .errors import SimulationError
from .evolution import (PropagationConfig, QuantumState, Trajectory,
                        advance_state, prepare_initial_state, run_trajectory)
from .noise import (CHANNEL_CRITICAL_CURRENT, CHANNEL_FLUX, NoiseSpec,
                    NoiseTrace, estimate_psd, generate_noise_trace)
from .spectrum import (BasisTable, CalibrationResult, EigenBasis, FluxGrid,
                       build_basis_table, calibrate_critical_current,
                       default_device, solve_eigenbasis)

__all__ = [
    "__version__",
    "BasisTable", "CHANNEL_CRITICAL_CURRENT", "CHANNEL_FLUX",
    "CalibrationResult", "CouplingParams", "DeviceParams", "EigenBasis",
    "EnsembleConfig", "EnsembleResult", "FitResult", "FluxGrid", "HBAR",
    "LinearFit", "NoiseSpec", "NoiseTrace", "PHI0", "PowerLawFit",
    "PropagationConfig", "QuantumState", "SimulationError", "SweepResult",
    "SweepRow", "Trajectory", "TwoStateParams", "WellGeometry",
    "advance_state", "angular_coefficients", "bandwidth_sweep",
    "build_basis_table",
    "calibrate_critical_current", "default_device", "dephasing_rate",
    "derive_seed", "estimate_psd", "extract_two_state", "fit_damped_cosine",
    "generate_noise_trace", "linear_fit", "mutual_inductance_threshold",
    "potential", "power_law_fit", "prepare_initial_state", "pulse_flux",
    "pulse_flux_uphi0", "reduce_density_matrix", "relative_spread",
    "run_ensemble", "run_trajectory", "solve_eigenbasis",
    "threshold_from_sweep", "to_flux_basis", "variance_sweep",
    "well_geometry",
]
