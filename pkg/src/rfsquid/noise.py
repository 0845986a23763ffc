"""Band-limited Gaussian noise synthesis and spectral estimation.

Traces are built in the frequency domain: every discrete Fourier bin inside
(0, omega_c] receives an independent complex Gaussian coefficient, all bins
above the cutoff (and the DC bin) are exactly zero, and the inverse FFT
yields a real, stationary, zero-mean Gaussian sequence whose expected total
variance equals sigma^2.  The construction is bit-reproducible from the seed
and scales linearly in sigma for a fixed seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import NonPositiveParameter, NyquistViolation, TraceTooShort

CHANNEL_FLUX = "flux"
CHANNEL_CRITICAL_CURRENT = "critical_current"


@dataclass(frozen=True)
class NoiseSpec:
    """Stationary band-limited Gaussian process specification.

    sigma is the standard deviation of the samples: uPhi0 for the flux
    channel, fractional critical-current deviation for the other.  cutoff is
    the angular cutoff frequency in rad/ns, dt the sample interval in ns.
    """

    sigma: float
    cutoff: float
    dt: float
    n_steps: int
    channel: str = CHANNEL_FLUX

    def __post_init__(self):
        if self.sigma < 0:
            raise NonPositiveParameter(f"sigma must be >= 0, got {self.sigma}")
        if self.dt <= 0:
            raise NonPositiveParameter(f"dt must be positive, got {self.dt}")
        if self.n_steps < 2:
            raise NonPositiveParameter(f"n_steps must be >= 2, got {self.n_steps}")
        if self.channel not in (CHANNEL_FLUX, CHANNEL_CRITICAL_CURRENT):
            raise NonPositiveParameter(f"unknown channel {self.channel!r}")
        if self.cutoff <= 0:
            raise NonPositiveParameter("cutoff must be positive")
        if self.cutoff > np.pi / self.dt * (1 + 1e-12):
            raise NyquistViolation(
                f"cutoff {self.cutoff:.4g} rad/ns above Nyquist "
                f"{np.pi / self.dt:.4g} rad/ns at dt = {self.dt} ns")
        if self.sigma > 0 and self.n_bins < 1:
            raise NyquistViolation(
                f"cutoff {self.cutoff:.4g} rad/ns below the fundamental bin "
                f"{2 * np.pi / (self.n_steps * self.dt):.4g} rad/ns; "
                "no in-band Fourier component exists")

    @property
    def n_bins(self) -> int:
        """Number of positive-frequency bins inside the band (Nyquist excluded)."""
        m = int(np.floor(self.cutoff * self.n_steps * self.dt / (2.0 * np.pi)))
        return min(m, (self.n_steps - 1) // 2 if self.n_steps % 2 else
                   self.n_steps // 2 - 1)

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt


@dataclass(frozen=True)
class NoiseTrace:
    spec: NoiseSpec
    seed: object
    samples: np.ndarray

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("step,value\n")
            for i, x in enumerate(self.samples):
                f.write(f"{i},{x:.17g}\n")


def generate_noise_trace(spec: NoiseSpec, seed) -> NoiseTrace:
    """Synthesize one realization.

    Parameters
    ----------
    seed : int or numpy.random.SeedSequence
        Consumed through numpy's Generator, so equal seeds give identical
        samples and the draw order does not depend on sigma.

    The per-bin draws are interleaved (re, im, re, im, ...) so that for a
    fixed seed a wider band reuses the narrower band's bin amplitudes and
    only appends new ones.  Bandwidth sweeps rely on this common-random-
    numbers coupling to compare rows without reseeding noise.
    """
    n = spec.n_steps
    if spec.sigma == 0.0:
        return NoiseTrace(spec, seed, np.zeros(n))
    m = spec.n_bins
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal(2 * m)
    a = draws[0::2]
    b = draws[1::2]
    z = np.zeros(n // 2 + 1, dtype=complex)
    # irfft halves and mirrors interior bins, hence the factor n/2; sigma
    # multiplies last so scaling it rescales the same realization exactly
    z[1:m + 1] = (n / 2.0) / np.sqrt(m) * (a + 1j * b)
    samples = spec.sigma * np.fft.irfft(z, n)
    return NoiseTrace(spec, seed, samples)


def estimate_psd(samples, dt: float, nperseg: int = 1024,
                 window: str = "hann"):
    """Welch estimate of the one-sided power spectral density.

    Returns (omega, psd) with omega in rad/ns and psd scaled so that
    numerically integrating psd over omega recovers the sample variance.
    """
    samples = np.asarray(samples, dtype=float)
    if len(samples) < nperseg:
        raise TraceTooShort(
            f"need at least {nperseg} samples, got {len(samples)}")
    freq, pxx = scipy.signal.welch(samples, fs=1.0 / dt, window=window,
                                   nperseg=nperseg, detrend=False)
    return 2.0 * np.pi * freq, pxx / (2.0 * np.pi)
