"""Eigensolver oracles, gauge fixing, the basis table, and calibration."""
import numpy as np
import pytest

from rfsquid import DeviceParams, FluxGrid, angular_coefficients
from rfsquid.device import well_geometry
from rfsquid.errors import (BracketFailure, GridTooNarrow, InvalidSpectrum,
                            LevelsAboveBarrierEdge, NonPositiveParameter,
                            RangeTooNarrow)
from rfsquid.spectrum import (BasisTable, build_basis_table,
                              build_hamiltonian, calibrate_critical_current,
                              solve_eigenbasis)

HARMONIC = DeviceParams.from_lab(240.0, 100.0, 0.0)


def test_grid_spacing_and_points():
    g = FluxGrid(n_points=2001, half_width=0.35)
    assert g.spacing == pytest.approx(0.7 / 2000, rel=1e-15)
    pts = g.points
    assert len(pts) == 2001
    assert pts[0] == pytest.approx(0.15)
    assert pts[1000] == pytest.approx(0.5)


def test_grid_rejects_bad_parameters():
    with pytest.raises(NonPositiveParameter):
        FluxGrid(n_points=2)
    with pytest.raises(NonPositiveParameter):
        FluxGrid(half_width=0.0)


def test_grid_must_cover_wells(params):
    geo = well_geometry(params)
    with pytest.raises(GridTooNarrow):
        FluxGrid(half_width=0.05).require_covers(geo)
    FluxGrid().require_covers(geo)   # default grid is wide enough


def test_hamiltonian_is_symmetric_tridiagonal(params, grid):
    diag, off = build_hamiltonian(params, grid)
    # a (diag, off) pair encodes a matrix that is symmetric by construction
    assert diag.shape == (grid.n_points,)
    assert off.shape == (grid.n_points - 1,)
    assert np.all(off == off[0])
    assert off[0] < 0


def test_harmonic_spacing_oracle():
    # analytic oracle: all low spacings equal 1/sqrt(LC)
    basis = solve_eigenbasis(HARMONIC, FluxGrid(), n_levels=6)
    expect = 1e-9 / np.sqrt(240e-12 * 100e-15)
    gaps = np.diff(basis.energies)
    assert np.max(np.abs(gaps / expect - 1.0)) < 1e-4


def test_harmonic_ground_state_is_gaussian():
    basis = solve_eigenbasis(HARMONIC, FluxGrid(), n_levels=1)
    kinetic, quad, _ = angular_coefficients(HARMONIC)
    x = FluxGrid().points - 0.5
    width2 = np.sqrt(kinetic / quad) / 2.0      # <x^2> of the ground state
    g = np.exp(-x**2 / (4.0 * width2))
    g /= np.sqrt((g * g).sum() * FluxGrid().spacing)
    overlap = abs((g * basis.vectors[:, 0]).sum() * FluxGrid().spacing)
    assert overlap > 1.0 - 1e-6


def test_self_convergence_on_refinement(params):
    # doubling the grid moves the splitting by less than 1e-5 relative
    s1 = solve_eigenbasis(params, FluxGrid(), n_levels=2).splitting
    s2 = solve_eigenbasis(params, FluxGrid(n_points=4001), n_levels=2).splitting
    assert abs(s1 - s2) / s1 < 1e-5


def test_eigenvectors_orthonormal(params, grid):
    basis = solve_eigenbasis(params, grid, n_levels=10)
    gram = grid.spacing * (basis.vectors.T @ basis.vectors)
    assert np.max(np.abs(gram - np.eye(10))) < 1e-9


def test_parity_alternates_at_degeneracy(params, grid):
    basis = solve_eigenbasis(params, grid, n_levels=6)
    flipped = basis.vectors[::-1]
    for i in range(6):
        v = basis.vectors[:, i]
        sym = float(np.abs(v - (-1)**i * flipped[:, i]).max())
        assert sym < 1e-6 * float(np.abs(v).max())


def test_levels_above_barrier_edge_detected(params):
    # a grid barely wider than the wells cannot host 32 bound levels
    narrow = FluxGrid(n_points=801, half_width=0.13)
    with pytest.raises(LevelsAboveBarrierEdge):
        solve_eigenbasis(params, narrow, n_levels=32)


def test_table_shape_and_step(table12, grid):
    assert table12.n_bias == 241          # 2 * 12/0.1 + 1
    assert table12.n_levels == 10
    assert table12.bias_step == pytest.approx(0.1e-6, rel=1e-9)
    assert table12.half_range_uphi0 == pytest.approx(12.0, rel=1e-9)
    assert table12.bias_values[table12.center_index] == pytest.approx(0.5)
    assert table12.grid is grid


def test_table_gauge_continuity(table12):
    # adjacent entries of every level overlap positively
    v = table12.vectors[0]
    overlaps = np.einsum("bgi,bgi->bi", v[:-1], v[1:])
    assert np.min(overlaps) > 0.0


def test_table_center_gauge_localizes_right(table12):
    vc = table12.vectors[0, table12.center_index]
    right = (vc[:, 0] + vc[:, 1]) / np.sqrt(2.0)
    phi = table12.grid.points
    mean_phi = float((right * right * phi).sum() * table12.grid.spacing)
    assert mean_phi > 0.5 + 0.05


def test_splitting_minimal_at_center(table12):
    spl = table12.energies[0, :, 1] - table12.energies[0, :, 0]
    assert int(np.argmin(spl)) == table12.center_index


def test_two_state_consistency_along_table(table36):
    # (E1 - E0)^2 = delta^2 + eps^2 with eps linear in the bias offset
    delta = table36.delta
    spl = table36.energies[0, :, 1] - table36.energies[0, :, 0]
    offs = (table36.bias_values - 0.5) * 1e6
    eps = np.sqrt(np.maximum(spl**2 - delta**2, 0.0))
    keep = (np.abs(offs) > 1.0) & (np.abs(offs) <= 10.0)
    slope = eps[keep] / np.abs(offs[keep])
    assert np.max(np.abs(slope / slope.mean() - 1.0)) < 0.05


def test_energy_continuity_bound(table36):
    # adjacent-entry energy motion bounded by twice the two-state slope
    spl = table36.energies[0, :, 1] - table36.energies[0, :, 0]
    eps = np.sqrt(np.maximum(spl**2 - table36.delta**2, 0.0))
    offs = (table36.bias_values - 0.5) * 1e6
    edge = np.abs(offs) >= 5.0
    slope = float((eps[edge] / np.abs(offs[edge])).mean())   # rad/ns per uPhi0
    step = table36.bias_step * 1e6
    for level in (0, 1):
        jumps = np.abs(np.diff(table36.energies[0, :, level]))
        assert np.max(jumps) <= 2.0 * slope * step


def test_adjacent_projection_roundtrip(table36):
    h = table36.grid.spacing
    j = table36.center_index
    v0 = table36.vectors[0, j]
    v1 = table36.vectors[0, j + 1]
    c = h * (v1.T @ v0[:, 0])
    back = h * (v0.T @ (v1 @ c))
    assert 1.0 - float(back @ back) < 1e-6


def test_nearest_bias_lookup(table12):
    j, clamped = table12.nearest_bias_index(0.5)
    assert j == table12.center_index and not clamped
    j, clamped = table12.nearest_bias_index(0.5 + 3.04e-6)
    assert j == table12.center_index + 30 and not clamped
    j, clamped = table12.nearest_bias_index(0.5 + 99e-6)
    assert j == table12.n_bias - 1 and clamped
    j, clamped = table12.nearest_bias_index(0.5 - 99e-6)
    assert j == 0 and clamped


def test_require_covers_sigma(table12):
    table12.require_covers_sigma(2.0)
    with pytest.raises(RangeTooNarrow):
        table12.require_covers_sigma(2.01)


def test_table_save_load_roundtrip(tmp_path, table12):
    path = tmp_path / "table.npz"
    table12.save(path)
    loaded = BasisTable.load(path)
    assert np.array_equal(loaded.energies, table12.energies)
    assert np.array_equal(loaded.vectors, table12.vectors)
    assert np.array_equal(loaded.bias_values, table12.bias_values)
    assert loaded.content_key() == table12.content_key()


def test_table_save_is_byte_deterministic(tmp_path, table12):
    p1, p2 = tmp_path / "a.npz", tmp_path / "b.npz"
    table12.save(p1)
    table12.save(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_table_load_rejects_mismatched_key(tmp_path, table12):
    path = tmp_path / "table.npz"
    table12.save(path)
    with np.load(path) as f:
        arrays = {name: f[name] for name in f.files}
    arrays["key"] = np.array("0" * 64)
    bad = tmp_path / "bad.npz"
    np.savez(bad, **arrays)
    with pytest.raises(InvalidSpectrum):
        BasisTable.load(bad)


def test_content_key_tracks_inputs(params, grid, table12):
    other = build_basis_table(params, grid, half_range_uphi0=12.0, n_levels=4)
    assert other.content_key() != table12.content_key()


def test_ic_scale_axis(params, grid):
    t = build_basis_table(params, grid, half_range_uphi0=1.0,
                          ic_scales=[0.99, 1.0, 1.01])
    i, clamped = t.nearest_ic_index(1.0)
    assert i == 1 and not clamped
    i, clamped = t.nearest_ic_index(1.02)
    assert i == 2 and clamped
    # splitting shrinks when the barrier (I_c) grows
    spl = t.energies[:, t.center_index, 1] - t.energies[:, t.center_index, 0]
    assert spl[0] > spl[1] > spl[2]


def test_calibration_hits_target(cal):
    assert abs(cal.splitting - cal.target) <= 1e-3 * cal.target
    assert cal.splitting / (2 * np.pi) == pytest.approx(0.28, rel=2e-3)
    assert 1.0 < cal.params.beta_l < 2.0
    # independent re-solve at the returned current reproduces the splitting
    check = solve_eigenbasis(cal.params, FluxGrid(), n_levels=2).splitting
    assert check == pytest.approx(cal.splitting, rel=1e-12)


def test_calibration_deterministic(cal):
    again = calibrate_critical_current(cal.params.inductance,
                                       cal.params.capacitance)
    assert again.params.critical_current == cal.params.critical_current
    assert again.splitting == cal.splitting


def test_calibration_fixed_point(cal):
    # asking for the splitting already achieved returns the same current
    again = calibrate_critical_current(cal.params.inductance,
                                       cal.params.capacitance,
                                       target_splitting=cal.splitting)
    rel = abs(again.params.critical_current - cal.params.critical_current)
    assert rel / cal.params.critical_current < 1e-3


def test_calibration_unreachable_target(cal):
    plasma = 1e-9 / np.sqrt(cal.params.inductance * cal.params.capacitance)
    with pytest.raises(BracketFailure):
        calibrate_critical_current(cal.params.inductance,
                                   cal.params.capacitance,
                                   target_splitting=10.0 * plasma)
