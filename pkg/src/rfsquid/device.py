"""rf-SQUID loop parameters and the one-dimensional flux potential.

Unit conventions used throughout the package: flux is dimensionless in units
of the flux quantum Phi0, time is in ns, and energies are stored as angular
frequencies E/hbar in rad/ns.  Laboratory-facing constructors accept pH, fF,
uA and uPhi0 and convert at the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidSpectrum, NonPositiveParameter, NotDoubleWell

PHI0 = 2.067833848e-15  # flux quantum, Wb
HBAR = 1.054571817e-34  # reduced Planck constant, J s

_RAD_S_TO_RAD_NS = 1e-9


@dataclass(frozen=True)
class DeviceParams:
    """rf-SQUID loop in SI units plus the external flux bias in Phi0."""

    inductance: float         # H
    capacitance: float        # F
    critical_current: float   # A
    flux_bias: float = 0.5    # units of Phi0

    @classmethod
    def from_lab(cls, inductance_ph: float, capacitance_ff: float,
                 critical_current_ua: float, flux_bias: float = 0.5) -> "DeviceParams":
        return cls(inductance_ph * 1e-12, capacitance_ff * 1e-15,
                   critical_current_ua * 1e-6, flux_bias)

    @property
    def beta_l(self) -> float:
        """Screening parameter 2 pi L I_c / Phi0."""
        return 2.0 * np.pi * self.inductance * self.critical_current / PHI0

    def in_lab_units(self) -> dict:
        return {
            "inductance_ph": self.inductance * 1e12,
            "capacitance_ff": self.capacitance * 1e15,
            "critical_current_ua": self.critical_current * 1e6,
            "flux_bias_phi0": self.flux_bias,
        }

    def with_bias(self, flux_bias: float) -> "DeviceParams":
        return replace(self, flux_bias=flux_bias)

    def with_critical_current(self, critical_current: float) -> "DeviceParams":
        return replace(self, critical_current=critical_current)


# Defaults for simulation runs.  The loop geometry is chosen so that, once the
# critical current is calibrated to a 280 MHz tunnel splitting, the dephasing
# per unit flux noise lands near the reference quadratic law while the tilted
# ground state used for preparation keeps >99% of its weight in the doublet.
DEFAULT_INDUCTANCE_PH = 100.0
DEFAULT_CAPACITANCE_FF = 50.0
DEFAULT_SPLITTING_GHZ = 0.28


def validate(params: DeviceParams) -> DeviceParams:
    """Check positivity and the double-well condition beta_L > 1."""
    for name in ("inductance", "capacitance", "critical_current"):
        if getattr(params, name) <= 0.0:
            raise NonPositiveParameter(f"{name} must be positive, got "
                                       f"{getattr(params, name)!r}")
    if params.beta_l <= 1.0:
        raise NotDoubleWell(
            f"beta_L = {params.beta_l:.4f} <= 1: potential has a single well")
    return params


def angular_coefficients(params: DeviceParams) -> tuple[float, float, float]:
    """Coefficients (kinetic, quadratic, josephson) of the scaled Hamiltonian.

    With phi = Phi/Phi0 the Hamiltonian divided by hbar reads

        H/hbar = -kinetic d^2/dphi^2 + quadratic (phi - phi_x)^2
                 - josephson cos(2 pi phi)

    and all three coefficients are returned in rad/ns.
    """
    kinetic = HBAR / (2.0 * params.capacitance * PHI0**2) * _RAD_S_TO_RAD_NS
    quadratic = PHI0**2 / (2.0 * params.inductance * HBAR) * _RAD_S_TO_RAD_NS
    josephson = (params.critical_current * PHI0 / (2.0 * np.pi * HBAR)
                 * _RAD_S_TO_RAD_NS)
    return kinetic, quadratic, josephson


def potential(params: DeviceParams, phi) -> np.ndarray:
    """Potential energy U(phi)/hbar in rad/ns at flux phi (units of Phi0)."""
    phi = np.asarray(phi, dtype=float)
    _, quad, jos = angular_coefficients(params)
    return quad * (phi - params.flux_bias)**2 - jos * np.cos(2.0 * np.pi * phi)


def potential_gradient(params: DeviceParams, phi) -> np.ndarray:
    """dU/dphi in rad/ns per Phi0."""
    phi = np.asarray(phi, dtype=float)
    _, quad, jos = angular_coefficients(params)
    return 2.0 * quad * (phi - params.flux_bias) + \
        2.0 * np.pi * jos * np.sin(2.0 * np.pi * phi)


@dataclass(frozen=True)
class WellGeometry:
    """Stationary points of the double well, positions in Phi0, energies rad/ns."""

    left_minimum: float
    right_minimum: float
    barrier_position: float
    left_energy: float
    right_energy: float
    barrier_energy: float

    @property
    def barrier_height(self) -> float:
        """Barrier top measured from the deeper well bottom."""
        return self.barrier_energy - min(self.left_energy, self.right_energy)


def well_geometry(params: DeviceParams, span: float = 0.6) -> WellGeometry:
    """Locate the two minima and the barrier top around the flux bias.

    The gradient is scanned for sign changes on a fine grid and each root is
    polished with Brent's method, so stationary points are resolved to
    machine precision.  Raises NotDoubleWell when the bias window does not
    contain two minima separated by a barrier.
    """
    validate(params)
    lo, hi = params.flux_bias - span, params.flux_bias + span
    phi = np.linspace(lo, hi, 6001)
    g = potential_gradient(params, phi)
    sign_flips = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    roots = [brentq(lambda x: float(potential_gradient(params, x)),
                    phi[i], phi[i + 1], xtol=1e-15, rtol=8.9e-16)
             for i in sign_flips]
    minima, maxima = [], []
    for r in roots:
        # classify by a small symmetric difference of the gradient
        d = 1e-7
        curv = (potential_gradient(params, r + d)
                - potential_gradient(params, r - d)) / (2 * d)
        (minima if curv > 0 else maxima).append(r)
    minima = sorted(m for m in minima if abs(m - params.flux_bias) < 0.5)
    if len(minima) < 2:
        raise NotDoubleWell(
            f"found {len(minima)} minima near phi_x = {params.flux_bias}")
    left, right = minima[0], minima[-1]
    barriers = [m for m in maxima if left < m < right]
    if not barriers:
        raise NotDoubleWell("no barrier between the two minima")
    bar = barriers[0]
    ul, ur, ub = (float(potential(params, x)) for x in (left, right, bar))
    return WellGeometry(left, right, bar, ul, ur, ub)


@dataclass(frozen=True)
class TwoStateParams:
    """Effective two-level description of the lowest doublet.

    delta is the tunnel splitting at the degeneracy bias and epsilon the
    bias-induced asymmetry, both as angular frequencies in rad/ns.  epsilon
    is positive when the flux bias sits above Phi0/2.
    """

    delta: float
    epsilon: float

    @property
    def splitting(self) -> float:
        return float(np.hypot(self.delta, self.epsilon))


def extract_two_state(params: DeviceParams, energies,
                      degenerate_energies) -> TwoStateParams:
    """Reduce two spectra to (delta, epsilon).

    Parameters
    ----------
    energies : array
        Eigenvalues (rad/ns) at the bias stored in ``params``.
    degenerate_energies : array
        Eigenvalues at the symmetric bias phi_x = 1/2 of the same device.
    """
    energies = np.asarray(energies, dtype=float)
    deg = np.asarray(degenerate_energies, dtype=float)
    if len(energies) < 2 or len(deg) < 2:
        raise InvalidSpectrum("need at least two levels in both spectra")
    if np.any(np.diff(energies[:2]) < 0) or np.any(np.diff(deg[:2]) < 0):
        raise InvalidSpectrum("eigenvalues are not sorted ascending")
    delta = deg[1] - deg[0]
    split = energies[1] - energies[0]
    if split < delta * (1.0 - 1e-9):
        raise InvalidSpectrum(
            f"splitting {split:.6g} below degeneracy-point value {delta:.6g}")
    eps2 = max(split**2 - delta**2, 0.0)
    sign = 1.0 if params.flux_bias >= 0.5 else -1.0
    return TwoStateParams(delta=float(delta), epsilon=float(sign * np.sqrt(eps2)))
