"""Exception and warning classes used across the package."""


class ArchInftyError(Exception):
    """Base class for all package errors."""


class DomainError(ArchInftyError, ValueError):
    """An argument lies outside the domain of an operation."""


class StationarityError(ArchInftyError):
    """A stationarity precondition is violated.

    Raised when a sum such as ``lambda1 * sum_j b(j) R**j`` is not provably
    below its threshold, or when (S1)/(S2) fail so that no weakly stationary
    solution exists.
    """


class NoStationarySolutionError(StationarityError):
    """(S1) or (S2) does not hold, so the process has no weakly stationary solution."""


class TheoremNotApplicableError(ArchInftyError):
    """The hypothesis of a limit theorem is not satisfied for the given inputs."""


class HorizonError(DomainError):
    """A lag or index lies beyond the computed truncation horizon."""


class TruncationWarning(UserWarning):
    """A truncated sum may not have converged at the chosen horizon."""


class DegenerateKernelWarning(UserWarning):
    """The kernel is identically zero, so the process reduces to i.i.d. shocks."""


class SimulationOverflowError(ArchInftyError, OverflowError):
    """A simulated path produced non-finite values."""
