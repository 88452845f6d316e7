"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not converge."""


class NearPoleError(RuntimeError):
    """A linear solve was attempted too close to a pole of the amplitude."""


class FactorizationError(RuntimeError):
    """The pole residue is not a rank-one matrix within tolerance."""
