"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid discretization or method parameters."""


class SolverError(RuntimeError):
    """A stage solve failed to converge during time stepping.

    Attributes
    ----------
    step : int
        Index of the step (0-based) whose stage equation was not solved.
    report : SolverReport
        Diagnostics of the failed solve.
    """

    def __init__(self, message, step=None, report=None):
        super().__init__(message)
        self.step = step
        self.report = report
