"""Ensemble averaging, density-matrix properties, and reproducibility."""
import numpy as np
import pytest
import scipy.stats

from rfsquid import (EnsembleConfig, NoiseSpec, PropagationConfig,
                     derive_seed, fit_damped_cosine, linear_fit,
                     reduce_density_matrix, run_ensemble, to_flux_basis)
from rfsquid.errors import (LeakageBudgetExceeded, NonPositiveParameter,
                            RangeTooNarrow, TwoLevelWeightDeficit)

SPEC6 = NoiseSpec(sigma=6.0, cutoff=2 * np.pi * 4.0, dt=0.1, n_steps=350)


class _FakeTrajectory:
    """Carries only the two_level history, for reduction unit tests."""

    def __init__(self, two_level):
        self.two_level = np.asarray(two_level, dtype=complex)


def _run(initial, table, sigma=6.0, n=8, seed=0, workers=None, keep=False,
         n_steps=350, min_weight=0.95):
    spec = NoiseSpec(sigma=sigma, cutoff=2 * np.pi * 4.0, dt=0.1,
                     n_steps=n_steps)
    cfg = EnsembleConfig(n_members=n, master_seed=seed, workers=workers,
                         min_mean_weight=min_weight)
    return run_ensemble(initial, table,
                        PropagationConfig(n_steps=n_steps), spec, cfg,
                        keep_trajectories=keep)


def test_config_validation():
    with pytest.raises(NonPositiveParameter):
        EnsembleConfig(n_members=1)
    with pytest.raises(NonPositiveParameter):
        EnsembleConfig(workers=0)


def test_seed_derivation_distinct_and_stable():
    a = derive_seed(0, 0).generate_state(4)
    b = derive_seed(0, 0).generate_state(4)
    c = derive_seed(0, 1).generate_state(4)
    d = derive_seed(1, 0).generate_state(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_table_must_cover_six_sigma(initial12, table12):
    with pytest.raises(RangeTooNarrow):
        _run(initial12, table12, sigma=6.0)


def test_zero_noise_coherence_constant(initial36, table36):
    res = _run(initial36, table36, sigma=0.0, n=4)
    mags = np.abs(res.rho[:, 0, 1])
    assert np.max(np.abs(mags - 0.5)) < 1e-3
    # identical members: purity stays 1
    assert np.max(np.abs(res.purity - 1.0)) < 1e-9


def test_density_matrix_physicality(initial36, table36):
    res = _run(initial36, table36, n=8)
    herm = np.abs(res.rho - np.conj(np.transpose(res.rho, (0, 2, 1))))
    assert herm.max() < 1e-12
    traces = np.einsum("tii->t", res.rho).real
    assert np.max(np.abs(traces - 1.0)) < 1e-9
    eigs = np.linalg.eigvalsh(res.rho)
    assert eigs.min() > -1e-9


def test_p_equals_twice_re_rho01(initial36, table36):
    res = _run(initial36, table36, n=6)
    assert np.max(np.abs(res.p - 2.0 * res.rho[:, 0, 1].real)) < 1e-9
    assert np.max(np.abs(res.member_p.mean(axis=0) - res.p)) < 1e-9


def test_bitwise_determinism_and_worker_independence(initial36, table36):
    a = _run(initial36, table36, n=6, seed=3, workers=1)
    b = _run(initial36, table36, n=6, seed=3, workers=1)
    c = _run(initial36, table36, n=6, seed=3, workers=3)
    assert np.array_equal(a.rho, b.rho)
    assert np.array_equal(a.rho, c.rho)
    assert np.array_equal(a.member_p, c.member_p)
    assert np.array_equal(a.leakage_totals, c.leakage_totals)


def test_different_master_seeds_differ(initial36, table36):
    a = _run(initial36, table36, n=4, seed=0)
    b = _run(initial36, table36, n=4, seed=1)
    assert not np.array_equal(a.member_p, b.member_p)


def test_member_seeds_reported(initial36, table36):
    res = _run(initial36, table36, n=4, seed=5)
    assert len(res.member_seeds) == 4
    expect = derive_seed(5, 2).generate_state(4)
    assert np.array_equal(res.member_seeds[2].generate_state(4), expect)


def test_reduction_single_member_is_projector():
    c = np.exp(1j * np.linspace(0, 1, 7))[:, None] * np.array([0.6, 0.8])
    rho = reduce_density_matrix([_FakeTrajectory(c)])
    eigs = np.sort(np.linalg.eigvalsh(rho), axis=1)
    assert np.max(np.abs(eigs[:, 0])) < 1e-12
    assert np.max(np.abs(eigs[:, 1] - 1.0)) < 1e-12


def test_reduction_opposite_phases_cancel():
    plus = np.tile([1 / np.sqrt(2), 1 / np.sqrt(2)], (5, 1))
    minus = np.tile([1 / np.sqrt(2), -1 / np.sqrt(2)], (5, 1))
    rho = reduce_density_matrix([_FakeTrajectory(plus),
                                 _FakeTrajectory(minus)])
    assert np.max(np.abs(rho[:, 0, 1])) < 1e-15
    assert np.allclose(np.einsum("tii->t", rho).real, 1.0)


def test_reduction_random_phases_bound():
    # random-phase sum: |mean of exp(i theta)| ~ 1/sqrt(N) << 2/sqrt(N)
    rng = np.random.default_rng(42)
    n = 400
    members = []
    for theta in rng.uniform(0, 2 * np.pi, n):
        c = np.array([1.0, np.exp(1j * theta)]) / np.sqrt(2)
        members.append(_FakeTrajectory(c[None, :]))
    rho = reduce_density_matrix(members)
    assert abs(rho[0, 0, 1]) < 2.0 / np.sqrt(n)


def test_flux_basis_rotation():
    # the left-localized pure state is diagonal in the flux basis
    c = np.array([1.0, -1.0]) / np.sqrt(2)
    rho = reduce_density_matrix([_FakeTrajectory(c[None, :])])
    flux = to_flux_basis(rho[0])
    assert flux[1, 1].real == pytest.approx(1.0, abs=1e-12)   # left well
    assert abs(flux[0, 0]) < 1e-12
    # rotation is an involution
    assert np.allclose(to_flux_basis(flux), rho[0])


def test_coherence_decays_under_noise(initial96, table96):
    # Spearman trend: |rho01| falls with time at sigma >= 4
    res = _run(initial96, table96, sigma=6.0, n=20, seed=0)
    mags = np.abs(res.rho[:, 0, 1])
    corr = scipy.stats.spearmanr(res.times, mags)
    assert corr.statistic < 0
    assert corr.pvalue < 0.05


def test_cross_estimator_consistency(initial96, table96):
    # the log-envelope slope of |rho01| agrees with the damped-cosine rate
    res = _run(initial96, table96, sigma=10.0, n=50, seed=0)
    fit = fit_damped_cosine(res.times, res.p)
    mags = np.abs(res.rho[:, 0, 1])
    keep = mags > 0.05
    env = linear_fit(res.times[keep], np.log(mags[keep]))
    assert env.slope < 0
    rate_env = -env.slope
    assert rate_env == pytest.approx(fit.rate, rel=0.35, abs=3 * fit.rate_ci)


def test_weight_deficit_detected(initial36, table36):
    # an implausibly strict weight floor must trip the deficit guard
    with pytest.raises(TwoLevelWeightDeficit):
        _run(initial36, table36, sigma=6.0, n=4, min_weight=0.9999)


def test_member_failures_are_attributed(initial36, table36):
    # an unmeetable per-step leakage budget fails inside the first member
    spec = NoiseSpec(sigma=2.0, cutoff=2 * np.pi * 4.0, dt=0.1, n_steps=350)
    prop = PropagationConfig(leakage_step_budget=1e-30)
    with pytest.raises(LeakageBudgetExceeded, match="member 0"):
        run_ensemble(initial36, table36, prop, spec,
                     EnsembleConfig(n_members=3))


def test_leakage_statistics_reported(initial36, table36):
    res = _run(initial36, table36, n=5, keep=True)
    assert res.leakage_totals.shape == (5,)
    assert np.all(res.leakage_totals < 1e-3)
    assert res.leakage_mean.shape == res.times.shape
    assert len(res.trajectories) == 5
    assert res.clamped_steps.sum() == 0


def test_short_noise_traces_rejected(initial36, table36):
    spec = NoiseSpec(sigma=1.0, cutoff=2 * np.pi, dt=0.1, n_steps=100)
    with pytest.raises(NonPositiveParameter):
        run_ensemble(initial36, table36, PropagationConfig(n_steps=350),
                     spec, EnsembleConfig(n_members=2))
