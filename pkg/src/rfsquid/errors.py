"""Exception types raised by the simulation pipeline."""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SimulationError):
    """Bad run configuration (unknown key, wrong type, out-of-range value)."""


class NonPositiveParameter(SimulationError):
    """A physical parameter that must be positive is zero or negative."""


class NotDoubleWell(SimulationError):
    """Device parameters do not produce a double-well potential (beta_L <= 1)."""


class InvalidSpectrum(SimulationError):
    """Eigenvalue ordering or reality assumptions violated."""


class GridTooCoarse(SimulationError):
    """Finite-difference step too large for the requested accuracy."""


class GridTooNarrow(SimulationError):
    """Flux grid does not contain both wells plus a forbidden-region margin."""


class LevelsAboveBarrierEdge(SimulationError):
    """A requested eigenlevel lies too close to the potential at the grid edge."""


class RangeTooNarrow(SimulationError):
    """Basis table bias range does not cover the requested noise excursions."""


class ConvergenceFailure(SimulationError):
    """An iterative routine exhausted its budget without converging."""


class BracketFailure(SimulationError):
    """Root bracketing failed (target outside the searched interval)."""


class NyquistViolation(SimulationError):
    """Requested spectral content cannot be represented at the sample interval."""


class TraceTooShort(SimulationError):
    """Too few samples for the requested spectral estimate."""


class ExcessiveHigherLevelWeight(SimulationError):
    """Prepared state has too much weight outside the lowest two levels."""


class LeakageBudgetExceeded(SimulationError):
    """Per-step or accumulated projection leakage above budget."""


class ClampBudgetExceeded(SimulationError):
    """Too many noise samples fell outside the tabulated bias range."""


class TwoLevelWeightDeficit(SimulationError):
    """Ensemble-mean two-level weight too low for a faithful reduced state."""


class FitDiverged(SimulationError):
    """Nonlinear fit failed to produce finite parameters."""


class InsufficientPeriods(SimulationError):
    """Trace spans too few oscillation periods to fit a frequency."""


class NoFitAvailable(SimulationError):
    """Not enough usable rows for the requested summary fit."""
