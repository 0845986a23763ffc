"""Stochastic state propagation through the tabulated eigenbases.

Each noise sample holds the bias constant for one interval dt, so the exact
propagator factorizes into (i) re-expanding the state in the eigenbasis of
the new Hamiltonian and (ii) multiplying each coefficient by its phase
exp(-i E_n dt).  Weight lost by truncating the re-expansion at n_levels is
the projection leakage; it is tracked per step and the state renormalized.

The reported observable P(t) is evaluated in the two lowest levels of the
symmetric-bias (centre) eigenbasis, renormalized to the weight retained in
that doublet: P = 2 Re(c0 conj(c1)) / (|c0|^2 + |c1|^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import device as dev
from .errors import (ClampBudgetExceeded, ExcessiveHigherLevelWeight,
                     LeakageBudgetExceeded, NonPositiveParameter,
                     NyquistViolation)
from .spectrum import BasisTable, solve_eigenbasis

DEFAULT_DT_NS = 0.1
DEFAULT_N_STEPS = 350
DEFAULT_INITIAL_OFFSET_UPHI0 = 1000.0


@dataclass(frozen=True)
class PropagationConfig:
    """Fixed-step propagation locked to the noise sample interval."""

    dt: float = DEFAULT_DT_NS                   # ns
    n_steps: int = DEFAULT_N_STEPS
    initial_offset_uphi0: float = DEFAULT_INITIAL_OFFSET_UPHI0
    leakage_step_budget: float = 1e-6
    leakage_total_budget: float = 1e-3
    clamp_budget: float = 1e-3                  # fraction of steps

    def __post_init__(self):
        if self.dt <= 0:
            raise NonPositiveParameter(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise NonPositiveParameter("n_steps must be >= 1")
        if self.initial_offset_uphi0 <= 0:
            raise NonPositiveParameter("initial offset must be positive")

    def validate_against(self, table: BasisTable):
        # the doublet precession must be well sampled by dt
        phase = table.delta * self.dt
        if phase >= np.pi:
            raise NyquistViolation(
                f"doublet phase advance {phase:.3f} rad per step >= pi; "
                "decrease dt")


@dataclass
class QuantumState:
    """Coefficients in the eigenbasis of one table entry."""

    coefficients: np.ndarray   # complex, (n_levels,)
    bias_index: int
    ic_index: int = 0
    time: float = 0.0

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients)**2

    def copy(self) -> "QuantumState":
        return QuantumState(self.coefficients.copy(), self.bias_index,
                            self.ic_index, self.time)


@dataclass
class Trajectory:
    """One stochastic realization sampled every dt."""

    times: np.ndarray             # (n,)
    p: np.ndarray                 # (n,) renormalized doublet observable
    populations: np.ndarray       # (n, n_levels) in the instantaneous basis
    two_level: np.ndarray         # (n, 2) complex, centre-basis doublet, unit norm
    two_level_weight: np.ndarray  # (n,) doublet weight before renormalization
    leakage_per_step: np.ndarray  # (n,)
    clamped_steps: int
    final_state: QuantumState
    flux_seed: object = None

    @property
    def leakage_total(self) -> float:
        return float(self.leakage_per_step.sum())


def prepare_initial_state(params: dev.DeviceParams, table: BasisTable,
                          offset_uphi0: float = DEFAULT_INITIAL_OFFSET_UPHI0
                          ) -> QuantumState:
    """Ground state at a bias slightly below Phi0/2, expanded at the centre.

    The offset localizes the ground state in the left well; expanding it in
    the symmetric-bias eigenbasis gives a near-equal superposition of the
    doublet with a small admixture of higher levels, which is kept.  Raises
    ExcessiveHigherLevelWeight when the doublet holds less than 99% of the
    state.
    """
    if offset_uphi0 <= 0:
        raise NonPositiveParameter("offset must be positive")
    tilted = params.with_bias(0.5 - offset_uphi0 * 1e-6)
    ground = solve_eigenbasis(tilted, table.grid, n_levels=1).vectors[:, 0]
    if ground.sum() < 0:
        ground = -ground
    h = table.grid.spacing
    center = table.center_index
    i0, _ = table.nearest_ic_index(1.0)
    c = h * (table.vectors[i0, center].T @ ground)
    norm2 = float(c @ c)
    doublet = float(c[0]**2 + c[1]**2)
    if doublet < 0.99:
        raise ExcessiveHigherLevelWeight(
            f"doublet weight {doublet:.4f} < 0.99 at offset "
            f"{offset_uphi0:g} uPhi0")
    c = c / np.sqrt(norm2)
    return QuantumState(c.astype(complex), bias_index=center, ic_index=i0)


def advance_state(state: QuantumState, table: BasisTable, dt: float,
                  flux_uphi0: float = 0.0,
                  ic_scale: float = 1.0) -> tuple[QuantumState, float]:
    """One exact propagation interval; reference path for run_trajectory.

    Projects the state onto the eigenbasis at the requested bias and
    critical-current scale, advances the phases by dt (which may be
    negative, giving backward evolution), and renormalizes.  Returns the
    new state and the projection leakage.
    """
    h = table.grid.spacing
    j, _ = table.nearest_bias_index(0.5 + flux_uphi0 * 1e-6)
    i, _ = table.nearest_ic_index(ic_scale)
    psi = table.vectors[state.ic_index, state.bias_index] @ state.coefficients
    c = h * (table.vectors[i, j].T @ psi)
    norm2 = float((c * c.conjugate()).real.sum())
    leak = 1.0 - norm2
    c = (c / np.sqrt(norm2)) * np.exp(-1j * table.energies[i, j] * dt)
    return QuantumState(c, j, i, state.time + dt), leak


def run_trajectory(initial: QuantumState, table: BasisTable,
                   config: PropagationConfig, flux_trace=None,
                   ic_trace=None) -> Trajectory:
    """Propagate one noise realization for n_steps intervals of dt.

    flux_trace and ic_trace supply per-step samples (uPhi0 and fractional
    I_c deviation); None means that channel is quiet.  Raises
    LeakageBudgetExceeded or ClampBudgetExceeded when the respective budget
    is violated.
    """
    config.validate_against(table)
    n = config.n_steps
    dt = config.dt
    flux = np.zeros(n) if flux_trace is None else np.asarray(flux_trace.samples)
    ic = None if ic_trace is None else np.asarray(ic_trace.samples)
    for name, arr in (("flux", flux), ("ic", ic)):
        if arr is not None and len(arr) < n:
            raise NonPositiveParameter(
                f"{name} trace has {len(arr)} samples, {n} required")

    n_levels = table.n_levels
    h = table.grid.spacing
    vectors = table.vectors
    phases = np.exp(-1j * table.energies * dt)  # (n_ic, n_bias, n_levels)
    i_quiet, _ = table.nearest_ic_index(1.0)
    center_doublet = vectors[i_quiet, table.center_index][:, :2]

    bias0 = table.bias_values[0]
    bias_step = table.bias_step
    n_bias = table.n_bias

    c = initial.coefficients.astype(complex).copy()
    b_idx, i_idx = initial.bias_index, initial.ic_index

    p_out = np.empty(n)
    pops = np.empty((n, n_levels))
    two_level = np.empty((n, 2), dtype=complex)
    weights = np.empty(n)
    leaks = np.empty(n)
    clamped = 0

    for m in range(n):
        cr = c.view(np.float64).reshape(n_levels, 2)
        psi = vectors[i_idx, b_idx] @ cr            # (n_points, 2) re/im
        pops[m] = (cr * cr).sum(axis=1)

        d2 = h * (center_doublet.T @ psi)           # (2, 2) re/im
        c2 = d2[:, 0] + 1j * d2[:, 1]
        w2 = float(d2[0] @ d2[0] + d2[1] @ d2[1])
        weights[m] = w2
        p_out[m] = 2.0 * (c2[0] * c2[1].conjugate()).real / w2
        two_level[m] = c2 / np.sqrt(w2)

        # bias for the coming interval
        if bias_step > 0:
            j = int(round((0.5 + flux[m] * 1e-6 - bias0) / bias_step))
        else:
            j = 0
        if j < 0 or j >= n_bias:
            j = min(max(j, 0), n_bias - 1)
            clamped += 1
        if ic is not None:
            i_idx, ic_clamped = table.nearest_ic_index(1.0 + ic[m])
            clamped += ic_clamped

        dn = h * (vectors[i_idx, j].T @ psi)        # project onto new basis
        norm2 = float(dn[:, 0] @ dn[:, 0] + dn[:, 1] @ dn[:, 1])
        leak = 1.0 - norm2
        leaks[m] = leak
        if leak > config.leakage_step_budget:
            raise LeakageBudgetExceeded(
                f"step {m}: leakage {leak:.3e} above per-step budget "
                f"{config.leakage_step_budget:.1e}")
        dn /= np.sqrt(norm2)
        c = (dn[:, 0] + 1j * dn[:, 1]) * phases[i_idx, j]
        b_idx = j

    total_leak = float(np.abs(leaks).sum())
    if total_leak > config.leakage_total_budget:
        raise LeakageBudgetExceeded(
            f"accumulated leakage {total_leak:.3e} above budget "
            f"{config.leakage_total_budget:.1e}")
    if clamped > config.clamp_budget * n:
        raise ClampBudgetExceeded(
            f"{clamped} of {n} steps clamped to the table edge "
            f"(budget {config.clamp_budget:.1e})")

    times = np.arange(n) * dt
    final = QuantumState(c, b_idx, i_idx, time=n * dt)
    seed = None if flux_trace is None else flux_trace.seed
    return Trajectory(times, p_out, pops, two_level, weights, leaks,
                      clamped, final, flux_seed=seed)
