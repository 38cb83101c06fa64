"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """Non-finite or out-of-domain arguments."""


class BracketError(RuntimeError):
    """A root bracket could not be found within the expansion budget."""


class IntegrationError(RuntimeError):
    """The IVP integrator failed before reaching the requested endpoint."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class SolverError(RuntimeError):
    """An outer iteration (shooting, Newton, power iteration) did not converge."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class AssemblyError(RuntimeError):
    """Piecewise eigenfunctions could not be glued into a C1 function."""
