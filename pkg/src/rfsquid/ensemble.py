"""Ensemble averaging over independent noise realizations.

Member seeds derive from a single master seed through SeedSequence spawn
keys indexed by (member, channel), so any member of any ensemble can be
regenerated in isolation and adding members never reshuffles earlier ones.
The ensemble average is reported as the reduced 2x2 density matrix in the
symmetric-bias doublet, accumulated in member-index order so results do not
depend on the worker count.
"""
from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveParameter, SimulationError, TwoLevelWeightDeficit
from .evolution import PropagationConfig, QuantumState, Trajectory, run_trajectory
from .noise import (CHANNEL_CRITICAL_CURRENT, CHANNEL_FLUX, NoiseSpec,
                    generate_noise_trace)
from .spectrum import BasisTable

DEFAULT_N_MEMBERS = 50

_CHANNEL_IDS = {CHANNEL_FLUX: 0, CHANNEL_CRITICAL_CURRENT: 1}


def derive_seed(master_seed: int, member_index: int,
                channel: str = CHANNEL_FLUX) -> np.random.SeedSequence:
    """Per-member, per-channel seed from one master seed.

    Built as SeedSequence(master, spawn_key=(member, channel_id)) so streams
    are independent across both axes and stable under ensemble growth.
    """
    if channel not in _CHANNEL_IDS:
        raise NonPositiveParameter(f"unknown noise channel {channel!r}")
    return np.random.SeedSequence(master_seed,
                                  spawn_key=(member_index,
                                             _CHANNEL_IDS[channel]))


@dataclass(frozen=True)
class EnsembleConfig:
    n_members: int = DEFAULT_N_MEMBERS
    master_seed: int = 0
    workers: int | None = None
    min_mean_weight: float = 0.95

    def __post_init__(self):
        if self.n_members < 2:
            raise NonPositiveParameter("n_members must be >= 2")
        if self.workers is not None and self.workers < 1:
            raise NonPositiveParameter("workers must be >= 1 or None")


@dataclass
class EnsembleResult:
    """Averaged doublet dynamics plus per-member bookkeeping."""

    times: np.ndarray          # (n,)
    rho: np.ndarray            # (n, 2, 2) complex, trace 1 at every sample
    member_p: np.ndarray       # (n_members, n)
    mean_weight: np.ndarray    # (n,) doublet weight averaged over members
    leakage_mean: np.ndarray   # (n,) per-step leakage averaged over members
    leakage_totals: np.ndarray   # (n_members,)
    clamped_steps: np.ndarray    # (n_members,)
    master_seed: int
    member_seeds: list = None  # per-member flux-channel SeedSequences
    trajectories: list = None  # retained only on request

    @property
    def p(self) -> np.ndarray:
        """Ensemble-averaged observable, identical to 2 Re rho01."""
        return 2.0 * self.rho[:, 0, 1].real

    @property
    def n_members(self) -> int:
        return self.member_p.shape[0]

    @property
    def purity(self) -> np.ndarray:
        return np.einsum("tij,tji->t", self.rho, self.rho).real


_FLUX_ROTATION = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def to_flux_basis(rho: np.ndarray) -> np.ndarray:
    """Rotate energy-basis density matrices into the left/right flux basis.

    At the symmetric bias the localized flux states are (|0> +- |1>)/sqrt2,
    so the change of basis is a constant Hadamard rotation.
    """
    return _FLUX_ROTATION @ rho @ _FLUX_ROTATION


def reduce_density_matrix(trajectories: list[Trajectory]) -> np.ndarray:
    """Mean of the per-member doublet projectors, in list order."""
    n = len(trajectories[0].two_level)
    rho = np.zeros((n, 2, 2), dtype=complex)
    for traj in trajectories:
        c = traj.two_level
        rho += c[:, :, None] * c[:, None, :].conj()
    rho /= len(trajectories)
    return rho


_SHARED: dict = {}


def _member_inputs(config: EnsembleConfig, noise_spec: NoiseSpec,
                   ic_spec: NoiseSpec | None, index: int):
    flux = generate_noise_trace(noise_spec,
                                derive_seed(config.master_seed, index,
                                            CHANNEL_FLUX))
    ic = None
    if ic_spec is not None:
        ic = generate_noise_trace(ic_spec,
                                  derive_seed(config.master_seed, index,
                                              CHANNEL_CRITICAL_CURRENT))
    return flux, ic


def _run_member(index: int) -> Trajectory:
    s = _SHARED
    try:
        flux, ic = _member_inputs(s["config"], s["noise_spec"],
                                  s["ic_spec"], index)
        return run_trajectory(s["initial"], s["table"], s["prop"],
                              flux_trace=flux, ic_trace=ic)
    except SimulationError as exc:
        raise type(exc)(f"ensemble member {index}: {exc}") from exc


def run_ensemble(initial: QuantumState, table: BasisTable,
                 prop: PropagationConfig, noise_spec: NoiseSpec,
                 config: EnsembleConfig | None = None,
                 ic_spec: NoiseSpec | None = None,
                 keep_trajectories: bool = False) -> EnsembleResult:
    """Propagate n_members independent realizations and average them.

    The reduction runs in member-index order whatever the worker count, so
    a given (master_seed, n_members) pair always yields identical output.
    Raises TwoLevelWeightDeficit when the member-averaged doublet weight
    drops below min_mean_weight at any sample.
    """
    if config is None:
        config = EnsembleConfig()
    if noise_spec.n_steps < prop.n_steps:
        raise NonPositiveParameter(
            f"noise traces provide {noise_spec.n_steps} samples, "
            f"{prop.n_steps} required")
    table.require_covers_sigma(noise_spec.sigma)

    _SHARED.update(initial=initial, table=table, prop=prop,
                   noise_spec=noise_spec, ic_spec=ic_spec, config=config)
    indices = range(config.n_members)
    try:
        if config.workers and config.workers > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(config.workers) as pool:
                trajectories = pool.map(_run_member, indices)
        else:
            trajectories = [_run_member(i) for i in indices]
    finally:
        _SHARED.clear()

    rho = reduce_density_matrix(trajectories)
    mean_weight = np.mean([t.two_level_weight for t in trajectories], axis=0)
    low = float(mean_weight.min())
    if low < config.min_mean_weight:
        raise TwoLevelWeightDeficit(
            f"mean doublet weight dips to {low:.4f}, below "
            f"{config.min_mean_weight}")
    return EnsembleResult(
        times=trajectories[0].times,
        rho=rho,
        member_p=np.array([t.p for t in trajectories]),
        mean_weight=mean_weight,
        leakage_mean=np.mean([t.leakage_per_step for t in trajectories],
                             axis=0),
        leakage_totals=np.array([t.leakage_total for t in trajectories]),
        clamped_steps=np.array([t.clamped_steps for t in trajectories]),
        master_seed=config.master_seed,
        member_seeds=[t.flux_seed for t in trajectories],
        trajectories=trajectories if keep_trajectories else None)
