"""Flux coupling between a control line and the qubit loop.

A line carrying current I and sharing mutual inductance M with the loop
applies flux M*I.  Treating the per-pulse flux amplitude as an effective
noise amplitude sigma, the fitted dephasing law D = k * sigma**p converts
it into a rate; inverting the chain bounds the mutual inductance that
keeps dephasing below a target.  The inversion is an order-of-magnitude
estimate: a pulse train is not stationary Gaussian noise, only its
amplitude enters.
"""
from __future__ import annotations

from dataclasses import dataclass

from .device import PHI0
from .errors import NonPositiveParameter

FEMTOHENRY = 1e-15
MICROAMP = 1e-6

# reference dephasing law for a 280 MHz device, D = k * sigma**p with
# sigma in uPhi0 and D in 1/ns; used when no fitted sweep is supplied
DEFAULT_RATE_COEFFICIENT = 3.63e-4
DEFAULT_RATE_EXPONENT = 2.0


@dataclass(frozen=True)
class CouplingParams:
    """Control-line coupling: SI fields, lab-unit constructor."""

    mutual_inductance: float          # H
    pulse_peak_current: float         # A
    pulse_duration_ps: float | None = None   # informational only

    def __post_init__(self):
        if self.mutual_inductance < 0 or self.pulse_peak_current < 0:
            raise NonPositiveParameter(
                "mutual inductance and current must be >= 0")

    @classmethod
    def from_lab(cls, mutual_fh: float, current_ua: float,
                 duration_ps: float | None = None) -> "CouplingParams":
        return cls(mutual_fh * FEMTOHENRY, current_ua * MICROAMP, duration_ps)


def pulse_flux(coupling: CouplingParams) -> float:
    """Flux M*I applied to the loop, in uPhi0."""
    return 1e6 * coupling.mutual_inductance * coupling.pulse_peak_current / PHI0


def pulse_flux_uphi0(mutual_fh: float, current_ua: float) -> float:
    """pulse_flux with scalar lab units: fH and uA in, uPhi0 out."""
    return pulse_flux(CouplingParams.from_lab(mutual_fh, current_ua))


def dephasing_rate(sigma_uphi0: float,
                   rate_coefficient: float = DEFAULT_RATE_COEFFICIENT,
                   exponent: float = DEFAULT_RATE_EXPONENT) -> float:
    """Evaluate the law D = k * sigma**p (sigma in uPhi0, D in 1/ns)."""
    if sigma_uphi0 < 0 or rate_coefficient <= 0:
        raise NonPositiveParameter("sigma >= 0 and coefficient > 0 required")
    return rate_coefficient * sigma_uphi0**exponent


def mutual_inductance_threshold(target_rate: float, current_ua: float,
                                rate_coefficient: float = DEFAULT_RATE_COEFFICIENT,
                                exponent: float = DEFAULT_RATE_EXPONENT
                                ) -> float:
    """Largest mutual inductance (fH) keeping dephasing at target_rate.

    target_rate is in 1/ns and current_ua in uA.  The admissible flux
    amplitude is (D/k)**(1/p) in uPhi0, and M follows from
    sigma = M * I / Phi0.  Doubling the current halves the bound.
    """
    if target_rate <= 0 or current_ua <= 0 or rate_coefficient <= 0:
        raise NonPositiveParameter("rate, current and coefficient must be "
                                   "positive")
    if exponent <= 0:
        raise NonPositiveParameter("exponent must be positive")
    sigma_uphi0 = (target_rate / rate_coefficient)**(1.0 / exponent)
    m = sigma_uphi0 * 1e-6 * PHI0 / (current_ua * MICROAMP)
    return m / FEMTOHENRY


def threshold_from_sweep(sweep_fit, target_rate: float,
                         current_ua: float) -> float:
    """Mutual-inductance bound (fH) from a fitted rate power law."""
    return mutual_inductance_threshold(target_rate, current_ua,
                                       sweep_fit.prefactor,
                                       sweep_fit.exponent)
