"""From the dephasing law to a mutual-inductance budget.

A control line at mutual inductance M carrying current I applies flux
M*I to the loop.  Reading the per-pulse flux amplitude as an effective
noise sigma and inverting the quadratic dephasing law turns a coherence
target into an upper bound on M, an order-of-magnitude screening number
for coupling circuitry.
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rfsquid import (dephasing_rate, mutual_inductance_threshold,
                     pulse_flux_uphi0)

OUT = pathlib.Path(__file__).parent / "out"

CURRENT_UA = 150.0
TARGET_RATE = 0.05        # 1/ns, i.e. 1/D = 20 ns


def main():
    strong = pulse_flux_uphi0(10.0, CURRENT_UA)
    print(f"a 10 fH line at {CURRENT_UA:.0f} uA applies "
          f"{strong:.1f} uPhi0 per pulse")
    print(f"  implied rate {dephasing_rate(strong):.1f} /ns: far too strong "
          f"for direct coupling")

    threshold = mutual_inductance_threshold(TARGET_RATE, CURRENT_UA)
    sigma_ok = pulse_flux_uphi0(threshold, CURRENT_UA)
    print(f"keeping 1/D above {1 / TARGET_RATE:.0f} ns requires "
          f"M <= {threshold:.4f} fH "
          f"({sigma_ok:.2f} uPhi0 per pulse)")

    mutuals = np.logspace(-2, 1.2, 120)
    rates = np.array([dephasing_rate(pulse_flux_uphi0(m, CURRENT_UA))
                      for m in mutuals])

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(mutuals, rates, lw=1.0)
    ax.axhline(TARGET_RATE, color="0.5", lw=0.8, ls="--")
    ax.axvline(threshold, color="0.5", lw=0.8, ls="--")
    ax.plot([10.0], [dephasing_rate(strong)], "rs", ms=5,
            label="10 fH example")
    ax.plot([threshold], [TARGET_RATE], "ko", ms=5,
            label=f"threshold {threshold:.3f} fH")
    ax.set_xlabel("mutual inductance (fH)")
    ax.set_ylabel("D_phi (1/ns)")
    ax.set_title(f"dephasing from a {CURRENT_UA:.0f} uA control line")
    ax.legend()
    fig.tight_layout()
    OUT.mkdir(exist_ok=True)
    fig.savefig(OUT / "coupling_threshold.png", dpi=150)
    print(f"wrote {OUT / 'coupling_threshold.png'}")


if __name__ == "__main__":
    main()
