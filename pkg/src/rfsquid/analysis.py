"""Fits and parameter sweeps on ensemble-averaged dynamics.

The central fit is a damped cosine with the phase pinned to pi, matching an
observable that starts at -1: P(t) = A exp(-D t) cos(w t + pi).  Sweep
drivers rerun the ensemble over a grid of noise parameters with per-row
seeds derived from one master seed, then reduce the rates to power-law or
linear summaries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .ensemble import (DEFAULT_N_MEMBERS, EnsembleConfig, EnsembleResult,
                       run_ensemble)
from .errors import (ConfigError, FitDiverged, InsufficientPeriods,
                     NoFitAvailable, NonPositiveParameter)
from .evolution import PropagationConfig, QuantumState
from .noise import CHANNEL_FLUX, NoiseSpec
from .spectrum import BasisTable

MIN_FIT_PERIODS = 3.0


@dataclass(frozen=True)
class FitResult:
    """Damped-cosine parameters with 1-sigma confidence intervals."""

    amplitude: float
    rate: float          # 1/ns
    frequency: float     # rad/ns
    phase: float         # rad, pi unless fitted
    amplitude_ci: float
    rate_ci: float
    frequency_ci: float
    residual_rms: float
    n_points: int
    converged: bool = True

    def model(self, times: np.ndarray) -> np.ndarray:
        return (self.amplitude * np.exp(-self.rate * times)
                * np.cos(self.frequency * times + self.phase))

    @classmethod
    def failed(cls, residual_rms: float, n_points: int) -> "FitResult":
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, nan, nan, residual_rms,
                   n_points, converged=False)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class PowerLawFit:
    """y = prefactor * x**exponent over the rows kept by the filter."""

    exponent: float
    prefactor: float
    exponent_stderr: float
    n_used: int


def _frequency_guess(times: np.ndarray, p: np.ndarray) -> float:
    """Location of the FFT magnitude peak, refined parabolically."""
    dt = times[1] - times[0]
    mag = np.abs(np.fft.rfft(p - p.mean()))
    mag[0] = 0.0
    k = int(np.argmax(mag))
    if 0 < k < len(mag) - 1:
        a, b, c = mag[k - 1], mag[k], mag[k + 1]
        denom = a - 2 * b + c
        if denom < 0:
            k = k + 0.5 * (a - c) / denom
    return 2 * np.pi * k / (len(p) * dt)


def _decay_guess(times: np.ndarray, p: np.ndarray) -> float:
    """Decay rate from the RMS ratio of the two trace halves."""
    half = len(p) // 2
    r1 = float(np.sqrt(np.mean(p[:half]**2)))
    r2 = float(np.sqrt(np.mean(p[half:2 * half]**2)))
    span = times[half] - times[0]
    if r2 <= 0 or r1 <= r2 * 1e-6 or span <= 0:
        return 0.0
    return max(np.log(r1 / r2) / span, 0.0)


def fit_damped_cosine(times: np.ndarray, p: np.ndarray,
                      fix_phase: bool = True,
                      x0: tuple | None = None) -> FitResult:
    """Least-squares fit of A exp(-D t) cos(w t + phase) to a trace.

    The phase is held at pi unless fix_phase is False.  Initial guesses
    come from the FFT peak and the half-trace RMS ratio; the solver is
    restarted from perturbed decay guesses and the lowest-residual fit
    wins.  Pass x0 = (A, D, w) or (A, D, w, phase) to override the guesses.
    Raises InsufficientPeriods when the trace covers fewer than three
    oscillation periods, FitDiverged when no start converges.
    """
    times = np.asarray(times, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(times) < 8 or len(times) != len(p):
        raise NonPositiveParameter("need matching traces of >= 8 samples")
    dt = times[1] - times[0]

    if x0 is not None:
        a0, d0, w0 = float(x0[0]), float(x0[1]), float(x0[2])
        ph0 = float(x0[3]) if len(x0) > 3 else np.pi
    else:
        a0 = float(np.max(np.abs(p)))
        d0 = _decay_guess(times, p)
        w0 = _frequency_guess(times, p)
        ph0 = np.pi

    if fix_phase:
        def model(t, a, d, w):
            return a * np.exp(-d * t) * np.cos(w * t + np.pi)
        lower = [0.0, 0.0, 0.0]
        upper = [2.0, np.inf, np.pi / dt]
        def pack(a, d, w): return (a, d, w, np.pi)
    else:
        def model(t, a, d, w, ph):
            return a * np.exp(-d * t) * np.cos(w * t + ph)
        lower = [0.0, 0.0, 0.0, -np.inf]
        upper = [2.0, np.inf, np.pi / dt, np.inf]
        def pack(a, d, w, ph): return (a, d, w, ph)

    starts = []
    for d_start in dict.fromkeys((d0, 3 * d0 + 1e-3, d0 / 3)):
        guess = [a0, d_start, min(max(w0, 1e-3), 0.99 * np.pi / dt)]
        if not fix_phase:
            guess.append(ph0)
        starts.append(guess)

    best = None
    for guess in starts:
        try:
            popt, pcov = curve_fit(model, times, p, p0=guess,
                                   bounds=(lower, upper), maxfev=20000)
        except (RuntimeError, ValueError):
            continue
        rss = float(np.sum((model(times, *popt) - p)**2))
        if best is None or rss < best[2]:
            best = (popt, pcov, rss)
    if best is None:
        raise FitDiverged("damped-cosine fit failed from every start")

    popt, pcov, rss = best
    a, d, w, ph = pack(*popt)
    periods = w * (times[-1] - times[0]) / (2 * np.pi)
    if periods < MIN_FIT_PERIODS:
        raise InsufficientPeriods(
            f"trace covers {periods:.2f} oscillation periods, "
            f"{MIN_FIT_PERIODS:g} required")
    ci = np.sqrt(np.maximum(np.diag(pcov), 0.0))
    return FitResult(amplitude=float(a), rate=float(d), frequency=float(w),
                     phase=float(ph), amplitude_ci=float(ci[0]),
                     rate_ci=float(ci[1]), frequency_ci=float(ci[2]),
                     residual_rms=float(np.sqrt(rss / len(p))),
                     n_points=len(p),
                     converged=bool(np.all(np.isfinite(ci[:3]))))


def linear_fit(x: np.ndarray, y: np.ndarray) -> LinearFit:
    """Ordinary least squares line with its coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    tss = float(np.sum((y - y.mean())**2))
    r2 = 1.0 - float(np.sum(resid**2)) / tss if tss > 0 else 0.0
    return LinearFit(float(slope), float(intercept), r2)


def power_law_fit(x: np.ndarray, y: np.ndarray,
                  y_ci: np.ndarray | None = None,
                  min_significance: float = 3.0) -> PowerLawFit:
    """Log-log line fit, keeping rows where y exceeds min_significance*ci.

    Raises NoFitAvailable when fewer than three rows survive the filter.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if y_ci is not None:
        keep &= y > min_significance * np.asarray(y_ci, dtype=float)
    if keep.sum() < 3:
        raise NoFitAvailable(
            f"{int(keep.sum())} rows significant, 3 required for a "
            "power-law fit")
    (slope, intercept), cov = np.polyfit(np.log(x[keep]), np.log(y[keep]),
                                         1, cov=True)
    return PowerLawFit(exponent=float(slope),
                       prefactor=float(np.exp(intercept)),
                       exponent_stderr=float(np.sqrt(max(cov[0, 0], 0.0))),
                       n_used=int(keep.sum()))


def relative_spread(values: np.ndarray) -> float:
    """(max - min) / mean, the flatness measure used for plateau checks."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if mean == 0:
        raise NonPositiveParameter("relative spread undefined for zero mean")
    return float((values.max() - values.min()) / mean)


@dataclass
class SweepRow:
    sigma: float       # uPhi0
    cutoff: float      # rad/ns
    seed: int          # master seed of this row's ensemble
    fit: FitResult
    ensemble: EnsembleResult


@dataclass
class SweepResult:
    """Per-row ensembles and fits from one parameter sweep."""

    kind: str          # "variance" or "bandwidth"
    rows: list[SweepRow]
    master_seed: int

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([r.sigma for r in self.rows])

    @property
    def cutoffs(self) -> np.ndarray:
        return np.array([r.cutoff for r in self.rows])

    @property
    def rates(self) -> np.ndarray:
        return np.array([r.fit.rate for r in self.rows])

    @property
    def rate_cis(self) -> np.ndarray:
        return np.array([r.fit.rate_ci for r in self.rows])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([r.fit.frequency for r in self.rows])

    def rate_power_law(self, min_significance: float = 3.0) -> PowerLawFit:
        """Power law of rate versus the swept axis (sigma or cutoff).

        Unconverged rows drop out through the significance filter because
        their rates are NaN.
        """
        x = self.sigmas if self.kind == "variance" else self.cutoffs
        rates = self.rates
        cis = np.where(np.isfinite(self.rate_cis), self.rate_cis, np.inf)
        rates = np.where(np.isfinite(rates), rates, 0.0)
        return power_law_fit(x, rates, cis, min_significance)

    def sub_band_linearity(self, omega0: float) -> LinearFit:
        """Line fit of rate vs cutoff over the rows with cutoff <= omega0."""
        keep = self.cutoffs <= omega0
        if keep.sum() < 3:
            raise NoFitAvailable("need >= 3 rows at or below omega0")
        return linear_fit(self.cutoffs[keep], self.rates[keep])

    def super_band_spread(self, omega0: float) -> float:
        """Relative spread of the rates over the rows with cutoff > omega0."""
        keep = self.cutoffs > omega0
        if keep.sum() < 2:
            raise NoFitAvailable("need >= 2 rows above omega0")
        return relative_spread(self.rates[keep])


def _run_row(initial: QuantumState, table: BasisTable,
             prop: PropagationConfig, sigma: float, cutoff: float,
             seed: int, n_members: int, workers: int | None,
             fix_phase: bool) -> SweepRow:
    spec = NoiseSpec(sigma=sigma, cutoff=cutoff, dt=prop.dt,
                     n_steps=prop.n_steps, channel=CHANNEL_FLUX)
    config = EnsembleConfig(n_members=n_members, master_seed=seed,
                            workers=workers)
    result = run_ensemble(initial, table, prop, spec, config)
    try:
        fit = fit_damped_cosine(result.times, result.p, fix_phase=fix_phase)
    except (FitDiverged, InsufficientPeriods):
        # flag the row rather than dropping it; NaN rates fall out of the
        # power-law filter downstream
        fit = FitResult.failed(float(np.sqrt(np.mean(result.p**2))),
                               len(result.p))
    return SweepRow(sigma=sigma, cutoff=cutoff, seed=seed, fit=fit,
                    ensemble=result)


def variance_sweep(initial: QuantumState, table: BasisTable,
                   prop: PropagationConfig, sigmas, cutoff: float,
                   master_seed: int = 0,
                   n_members: int = DEFAULT_N_MEMBERS,
                   workers: int | None = None,
                   fix_phase: bool = True) -> SweepResult:
    """Dephasing rate versus noise amplitude at a fixed cutoff.

    sigmas is a list of standard deviations in uPhi0; rows come back sorted
    by sigma.  Every row's ensemble shares the master seed, so rows see the
    same noise realizations scaled to their sigma (common random numbers);
    differences between rows then reflect the amplitude alone, which makes
    the fitted exponent far less sensitive to the seed.
    """
    rows = [_run_row(initial, table, prop, float(s), float(cutoff),
                     master_seed, n_members, workers, fix_phase)
            for s in sorted(float(s) for s in sigmas)]
    return SweepResult(kind="variance", rows=rows, master_seed=master_seed)


def bandwidth_sweep(initial: QuantumState, table: BasisTable,
                    prop: PropagationConfig, cutoffs, sigma_ref: float,
                    omega_ref: float, hold: str = "psd",
                    master_seed: int = 0,
                    n_members: int = DEFAULT_N_MEMBERS,
                    workers: int | None = None,
                    fix_phase: bool = True) -> SweepResult:
    """Dephasing rate versus noise cutoff frequency.

    hold selects what stays fixed as the cutoff moves: "psd" keeps the
    in-band spectral density at its value for (sigma_ref, omega_ref), so
    sigma scales as sqrt(cutoff / omega_ref); "sigma" keeps the total
    variance sigma_ref**2 regardless of cutoff.

    Rows share the master seed: together with the interleaved bin draws in
    the noise synthesis, a wider band extends the narrower band's
    realization instead of redrawing it, so row-to-row differences isolate
    the bandwidth effect.
    """
    if hold not in ("psd", "sigma"):
        raise ConfigError(f"hold must be 'psd' or 'sigma', got {hold!r}")
    if omega_ref <= 0 or sigma_ref < 0:
        raise NonPositiveParameter("sigma_ref >= 0 and omega_ref > 0 required")
    rows = []
    for wc in sorted(float(c) for c in cutoffs):
        sigma = (sigma_ref * np.sqrt(wc / omega_ref) if hold == "psd"
                 else sigma_ref)
        rows.append(_run_row(initial, table, prop, sigma, wc,
                             master_seed, n_members, workers, fix_phase))
    return SweepResult(kind="bandwidth", rows=rows, master_seed=master_seed)
