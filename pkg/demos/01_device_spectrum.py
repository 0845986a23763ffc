"""Calibrate the default device and look at its double-well spectrum.

Builds the standard 100 pH / 50 fF loop, calibrates the junction so the
symmetric-bias tunnel splitting sits at 280 MHz, then prints the resulting
parameters and renders the potential with the lowest eigenstates plus the
splitting as a function of static flux bias.
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rfsquid import (FluxGrid, build_basis_table, default_device, potential,
                     solve_eigenbasis, well_geometry)

OUT = pathlib.Path(__file__).parent / "out"


def main():
    calibration = default_device()
    params = calibration.params
    lab = params.in_lab_units()
    print("calibrated device")
    print(f"  L = {lab['inductance_ph']:.1f} pH, "
          f"C = {lab['capacitance_ff']:.1f} fF, "
          f"I_c = {lab['critical_current_ua']:.4f} uA")
    print(f"  beta_L = {params.beta_l:.4f}")
    print(f"  splitting = {calibration.splitting:.5f} rad/ns "
          f"({calibration.splitting / (2 * np.pi):.4f} GHz), "
          f"{calibration.iterations} bisection steps")

    wells = well_geometry(params)
    print(f"  well minima at {wells.left_minimum:.4f} and "
          f"{wells.right_minimum:.4f} Phi0, "
          f"barrier height {wells.barrier_height:.1f} rad/ns")

    grid = FluxGrid()
    basis = solve_eigenbasis(params, grid, n_levels=4)
    v = potential(params, grid.points)
    v -= v.min()

    # splitting vs static bias from a small table around the degeneracy
    table = build_basis_table(params, grid, half_range_uphi0=10.0,
                              step_uphi0=0.5, n_levels=2)
    bias_uphi0 = (table.bias_values - 0.5) * 1e6
    gaps = table.energies[0, :, 1] - table.energies[0, :, 0]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(grid.points, v, "k-", lw=1.2, label="potential")
    for e, psi in zip(basis.energies, basis.vectors.T):
        e0 = e - basis.energies[0] + v[grid.points.searchsorted(0.5)]
        ax1.axhline(e0, color="0.7", lw=0.6)
        ax1.plot(grid.points, e0 + 12 * np.abs(psi) ** 2, lw=0.9)
    ax1.set_xlim(0.3, 0.7)
    ax1.set_ylim(0, 1.2 * wells.barrier_height + basis.energies[3]
                 - basis.energies[0])
    ax1.set_xlabel("total flux (Phi0)")
    ax1.set_ylabel("energy (rad/ns)")
    ax1.set_title("double well and lowest doublets")

    ax2.plot(bias_uphi0, gaps, "o-", ms=3)
    ax2.set_xlabel("flux bias offset (uPhi0)")
    ax2.set_ylabel("E1 - E0 (rad/ns)")
    ax2.set_title("doublet gap vs static bias")
    fig.tight_layout()
    OUT.mkdir(exist_ok=True)
    fig.savefig(OUT / "device_spectrum.png", dpi=150)
    print(f"wrote {OUT / 'device_spectrum.png'}")

    # the gap away from degeneracy follows hypot(delta, slope * offset)
    delta = float(gaps[len(gaps) // 2])
    eps = np.sqrt(np.maximum(gaps**2 - delta**2, 0.0))
    slope = np.polyfit(np.abs(bias_uphi0[np.abs(bias_uphi0) >= 2]),
                       eps[np.abs(bias_uphi0) >= 2], 1)[0]
    print(f"  energy-bias slope = {slope:.4f} rad/ns per uPhi0")


if __name__ == "__main__":
    main()
