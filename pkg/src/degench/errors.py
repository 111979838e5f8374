"""Exception types shared across the solver, stationary and stability modules."""


class DegenchError(Exception):
    """Base class for numerical failures raised by this package."""


class NumericalError(DegenchError):
    """A linear solve or ODE integration failed."""


class DivergedError(DegenchError):
    """The time stepper tripped the blow-up detector (max|u| > 10)."""


class NoInterfaceError(DegenchError):
    """The order parameter does not change sign exactly once."""


class NoSolutionError(DegenchError):
    """A root solve (inner free-boundary or outer bisection) failed to bracket
    or converge; the message records which loop failed."""


class NotQuasiStationaryError(DegenchError):
    """The nonlinear relaxation did not reach the quasi-stationarity threshold
    within the allotted time."""


class UnstableModeError(DegenchError):
    """The linearized evolution grew instead of decaying, signalling a bad base
    state or scheme failure."""


class NoConvergenceError(DegenchError):
    """No stable fitting window could be identified in a decay series."""
