"""Exception and warning types shared across the package."""


class TwinParityError(Exception):
    """Base class for all package errors."""


class InvalidParameter(TwinParityError, ValueError):
    """A physical or numerical parameter is outside its valid range."""


class CutoffCapReached(TwinParityError):
    """The photon-number cutoff needed for the requested tail tolerance exceeds the cap.

    ``n_max`` holds the capped cutoff and ``tail`` the tail weight left beyond it,
    so callers can decide to proceed anyway.
    """

    def __init__(self, n_max: int, tail: float, tail_tol: float):
        self.n_max = n_max
        self.tail = tail
        self.tail_tol = tail_tol
        super().__init__(
            f"cutoff capped at n_max={n_max}; remaining tail {tail:.3e} exceeds tolerance {tail_tol:.1e}"
        )


class StatisticalError(TwinParityError):
    """A quantity is undefined for the given state or data."""


class ZeroMeanState(StatisticalError):
    """Normalized moments are undefined because the mean photon number is zero."""


class ZeroHeraldProbability(StatisticalError):
    """The heralding outcome has zero probability, so no conditional state exists."""


class CarNotAboveUnity(StatisticalError):
    """CAR <= 1: no pair correlation beyond accidentals."""


class ZeroSingles(StatisticalError):
    """No singles in the reference arm; Klyshko efficiency undefined."""


class NoHeraldEvents(StatisticalError):
    """No events with the requested herald outcome."""


class EmptyData(StatisticalError):
    """The count record contains no pulses."""


class InsufficientStatistics(StatisticalError):
    """The requested moment order exceeds what the conditional data supports."""


class MalformedCounts(TwinParityError, ValueError):
    """A joint-count file could not be parsed."""


class InsufficientData(UserWarning):
    """More than 1% of bootstrap resamples left the statistic undefined."""


class WeakPairCorrelation(UserWarning):
    """Coincidences do not exceed accidentals (effective Klyshko efficiency <= 0)."""
