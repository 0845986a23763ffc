"""Dephasing rate versus noise amplitude: the quadratic law.

Sweeps sigma from 2 to 16 uPhi0 at a 4 GHz cutoff with common random
numbers across rows, fits D = k sigma^p to the fitted rates, and compares
the result with the reference quadratic law k = 3.63e-4 (uPhi0^-2 / ns).
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rfsquid import (FluxGrid, PropagationConfig, build_basis_table,
                     default_device, prepare_initial_state, variance_sweep)

OUT = pathlib.Path(__file__).parent / "out"

SIGMAS = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0]
CUTOFF = 2 * np.pi * 4.0
N_MEMBERS = 50
REFERENCE_K = 3.63e-4


def main():
    params = default_device().params
    grid = FluxGrid()
    table = build_basis_table(params, grid, half_range_uphi0=96.0,
                              step_uphi0=0.5)
    initial = prepare_initial_state(params, table)

    sweep = variance_sweep(initial, table, PropagationConfig(), SIGMAS,
                           CUTOFF, master_seed=0, n_members=N_MEMBERS)
    law = sweep.rate_power_law()

    print(f"variance sweep, {N_MEMBERS} members per row, cutoff "
          f"{CUTOFF / (2 * np.pi):.0f} GHz")
    print(f"  {'sigma':>6} {'D_phi (1/ns)':>13} {'ci':>9} {'1/D (ns)':>9}")
    for row in sweep.rows:
        print(f"  {row.sigma:6.1f} {row.fit.rate:13.4e} "
              f"{row.fit.rate_ci:9.1e} {1 / row.fit.rate:9.1f}")
    print(f"  power law: D = k sigma^p, p = {law.exponent:.3f} "
          f"+- {law.exponent_stderr:.3f}, k = {law.prefactor:.3e}")
    print(f"  reference k = {REFERENCE_K:.2e} "
          f"({law.prefactor / REFERENCE_K:.2f}x)")

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.errorbar(sweep.sigmas, sweep.rates, yerr=sweep.rate_cis, fmt="o",
                ms=4, capsize=2, label="fitted rates")
    xs = np.linspace(min(SIGMAS), max(SIGMAS), 50)
    ax.plot(xs, law.prefactor * xs**law.exponent, "k-", lw=0.9,
            label=f"fit: p = {law.exponent:.2f}")
    ax.plot(xs, REFERENCE_K * xs**2, "r--", lw=0.9,
            label="reference 3.63e-4 sigma^2")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sigma (uPhi0)")
    ax.set_ylabel("D_phi (1/ns)")
    ax.legend()
    fig.tight_layout()
    OUT.mkdir(exist_ok=True)
    fig.savefig(OUT / "variance_sweep.png", dpi=150)
    print(f"wrote {OUT / 'variance_sweep.png'}")


if __name__ == "__main__":
    main()
